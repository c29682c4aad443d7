#include "stackroute/experiment.hpp"

#include <algorithm>
#include <bit>
#include <atomic>
#include <sstream>
#include <thread>

#include "stackroute/oracle.hpp"
#include "stackroute/simulator.hpp"

namespace stackroute {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RunRecord execute_run(const ExperimentSpec& spec, double p, std::size_t h_max,
                      std::uint64_t run_seed) {
    RunRecord rec;
    rec.n = spec.n;
    rec.alpha = spec.alpha;
    rec.p = p;
    rec.h_max = h_max;
    rec.run_seed = run_seed;

    try {
        Network net = generate_random(spec.n, spec.alpha, p, spec.m_attach, run_seed);
        net.set_default_cost(spec.default_cost);

        const NodeId source = NodeId::from_alias(generated_node_alias(0, spec.n));
        const NodeId dest = NodeId::from_alias(generated_node_alias(spec.n - 1, spec.n));

        const EngineConfig cfg = EngineConfig::bounded(h_max);
        const SimResult sim = run_to_quiescence(net, cfg, spec.max_rounds);
        rec.rounds = sim.metrics.rounds_to_quiescence;
        rec.messages = sim.metrics.total_messages;

        const RoutingTable& table = sim.tables.at(source);
        for (const auto& [key, row] : table) {
            if (row.dest == dest && row.stack.height() == 1) {
                rec.found = true;
                rec.cost = rec.cost ? std::min(*rec.cost, row.cost) : row.cost;
            }
        }

        if (spec.with_oracle) {
            if (!net.node(dest).in_set().empty()) {
                const AllPairs near = all_pairs_single(net, h_max, dest);
                for (std::size_t x = 0; x < spec.alpha; ++x) {
                    const auto d = near.distance(
                        source, ProtocolStack::single(ProtocolId{static_cast<std::uint8_t>(x)}),
                        dest);
                    if (d && (!rec.oracle_cost || *d < *rec.oracle_cost)) {
                        rec.oracle_cost = d;
                    }
                }
                const AllPairs far =
                    all_pairs_single(net, h_max + spec.oracle_extra_height, dest);
                bool reachable = false;
                for (std::size_t x = 0; x < spec.alpha && !reachable; ++x) {
                    reachable = far.distance(source,
                                             ProtocolStack::single(
                                                 ProtocolId{static_cast<std::uint8_t>(x)}),
                                             dest)
                                    .has_value();
                }
                rec.oracle_found = reachable;
            } else {
                rec.oracle_found = false;
            }
        }

        if (spec.with_diameter) {
            rec.diam = diameter(net, h_max);
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

std::uint64_t derive_run_seed(std::uint64_t master, double p, std::size_t run_index) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ std::bit_cast<std::uint64_t>(p));
    s = splitmix64(s ^ (0x200000003ULL * (run_index + 1)));
    return s;
}

double ExperimentResult::found_rate(double p, std::size_t h_max) const {
    std::size_t total = 0;
    std::size_t found = 0;
    for (const RunRecord& r : rows) {
        if (r.h_max == h_max && r.p == p && r.error.empty()) {
            ++total;
            found += r.found ? 1 : 0;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(total);
}

std::string ExperimentResult::csv() const {
    std::ostringstream out;
    out << "# n=" << spec.n << " alpha=" << spec.alpha << " m_attach=" << spec.m_attach
        << " runs=" << spec.runs << " master_seed=" << spec.seed << '\n';
    out << "# extremities: source=" << source_alias << " (first generated) dest=" << dest_alias
        << " (last added)\n";
    if (spec.with_oracle) {
        out << "# oracle_found cap: h_max+" << spec.oracle_extra_height << '\n';
    }
    out << "n,alpha,p,h_max,run_seed,rounds,messages,found,cost,oracle_cost,oracle_found,diam,"
           "error\n";
    for (const RunRecord& r : rows) {
        out << r.n << ',' << r.alpha << ',' << r.p << ',' << r.h_max << ',' << r.run_seed << ','
            << r.rounds << ',' << r.messages << ',' << (r.found ? 1 : 0) << ',';
        if (r.cost) {
            out << *r.cost;
        }
        out << ',';
        if (r.oracle_cost) {
            out << *r.oracle_cost;
        }
        out << ',';
        if (r.oracle_found) {
            out << (*r.oracle_found ? 1 : 0);
        }
        out << ',';
        if (r.diam) {
            out << *r.diam;
        }
        out << ',' << r.error << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.runs < 1 || spec.p_list.empty() || spec.h_max_list.empty()) {
        throw std::invalid_argument("experiment: runs >= 1 and non-empty p/h_max lists");
    }

    ExperimentResult result;
    result.spec = spec;
    result.source_alias = generated_node_alias(0, spec.n);
    result.dest_alias = generated_node_alias(spec.n - 1, spec.n);

    struct Cell {
        double p;
        std::size_t h_max;
        std::size_t run;
    };
    std::vector<Cell> cells;
    for (double p : spec.p_list) {
        for (std::size_t h : spec.h_max_list) {
            for (std::size_t r = 0; r < spec.runs; ++r) {
                cells.push_back({p, h, r});
            }
        }
    }

    result.rows.resize(cells.size());
    const unsigned jobs = std::max(1u, spec.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            const Cell& c = cells[i];
            result.rows[i] =
                execute_run(spec, c.p, c.h_max, derive_run_seed(spec.seed, c.p, c.run));
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    return result;
}

}  // namespace stackroute
