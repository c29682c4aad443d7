// stackroute: stack-vector routing with automatic tunneling.
//
// Subcommands: gen, run, oracle (all-pairs | query | check), route,
// experiment. Exit codes: 0 ok, 2 usage, 3 non-convergence, 4 oracle
// budget exceeded.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "stackroute/dataplane.hpp"
#include "stackroute/experiment.hpp"
#include "stackroute/network.hpp"
#include "stackroute/oracle.hpp"
#include "stackroute/simulator.hpp"

namespace {

using namespace stackroute;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitOracleBudget = 4;

struct CliExit {
    int code;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << content;
}

std::ostream& output_stream(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") {
        return std::cout;
    }
    file.open(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    return file;
}

const NodeSpec& node_by_alias(const Network& net, const std::string& alias) {
    const NodeSpec* spec = net.find_node_by_alias(alias);
    if (!spec) {
        throw CLI::ValidationError("unknown node \"" + alias + "\"");
    }
    return *spec;
}

// ---------------------------------------------------------------------------

struct GenOptions {
    std::size_t n = 50;
    std::size_t alpha = 2;
    double p = 0.1;
    std::size_t m_attach = 5;
    std::uint64_t seed = 1;
    std::string out;
};

void cmd_gen(const GenOptions& opt) {
    const Network net = generate_random(opt.n, opt.alpha, opt.p, opt.m_attach, opt.seed);
    save_network(net, opt.out);
    std::cerr << "wrote " << opt.out << ": " << net.node_count() << " nodes, "
              << net.edges().size() << " directed links\n";
}

struct RunOptions {
    std::string net_path;
    std::size_t h_max = 3;
    bool theoretical = false;
    std::size_t max_rounds = 1'000'000;
    std::string tables_out;
    std::string trace_out;
};

EngineConfig config_for(const RunOptions& opt) {
    return opt.theoretical ? EngineConfig::theoretical() : EngineConfig::bounded(opt.h_max);
}

void cmd_run(const RunOptions& opt) {
    const Network net = load_network(opt.net_path);
    const EngineConfig cfg = config_for(opt);
    std::cerr << "h_max_effective=" << cfg.effective_h_max(net) << "\n";

    std::ofstream trace_file;
    TraceSink sink;
    if (!opt.trace_out.empty()) {
        trace_file.open(opt.trace_out, std::ios::binary);
        if (!trace_file) {
            throw std::runtime_error("cannot write " + opt.trace_out);
        }
        sink = [&trace_file, &net](const TraceEvent& e) {
            trace_file << format_trace_line(e, net) << '\n';
        };
    }

    SimResult result;
    try {
        result = run_to_quiescence(net, cfg, opt.max_rounds, sink);
    } catch (const NonConvergenceError& e) {
        if (!opt.tables_out.empty()) {
            write_file(opt.tables_out, dump_tables_csv(net, e.partial.tables));
        }
        std::cerr << "error: " << e.what() << " (partial tables dumped)\n";
        throw CliExit{kExitNoConvergence};
    }

    if (!opt.tables_out.empty()) {
        write_file(opt.tables_out, dump_tables_csv(net, result.tables));
    }
    std::cout << "rounds,messages,max_stack_height\n"
              << result.metrics.rounds_to_quiescence << ',' << result.metrics.total_messages
              << ',' << result.metrics.max_message_stack_height << "\n";
}

struct OracleOptions {
    std::string net_path;
    std::size_t h_max = 3;
    std::uint64_t budget = kDefaultOracleBudget;
    std::string out;
    // query
    std::string source;
    std::string dest;
    std::string stack_text;
    // check
    std::string path_file;
    std::string path_text;
};

void report_line(std::ostream& out, const Network& net, const AllPairs& ap, const NodeId& src,
                 const ProtocolStack& stack, const NodeId& dest) {
    const auto* info = ap.find(src, stack, dest);
    out << net.node_name(src) << ',' << net.node_name(dest) << ','
        << to_string(stack, net.protocols()) << ',';
    if (!info) {
        out << ",,,unreachable\n";
        return;
    }
    const FeasiblePath path = ap.witness(src, stack, dest);
    const PathCheck check = feasible_check(net, path);
    out << info->cost << ',' << info->hops << ',' << check.max_height << ",\""
        << to_string(path, net) << "\"\n";
}

void cmd_oracle_all_pairs(const OracleOptions& opt) {
    const Network net = load_network(opt.net_path);
    std::ofstream file;
    std::ostream& out = output_stream(opt.out, file);

    const AllPairs ap = all_pairs(net, opt.h_max, opt.budget);
    out << "source,dest,initial,cost,hops,max_height,path\n";
    for (const NodeId& dest : ap.destinations()) {
        for (const auto& [key, info] : ap.states(dest)) {
            if (key.first == dest || key.second.height() != 1) {
                continue;
            }
            report_line(out, net, ap, key.first, key.second, dest);
        }
    }
}

void cmd_oracle_query(const OracleOptions& opt) {
    const Network net = load_network(opt.net_path);
    const NodeId src = node_by_alias(net, opt.source).id;
    const NodeId dest = node_by_alias(net, opt.dest).id;
    const ProtocolStack stack = parse_stack(opt.stack_text, net.protocols());

    std::ofstream file;
    std::ostream& out = output_stream(opt.out, file);
    const AllPairs ap = all_pairs_single(net, opt.h_max, dest, opt.budget);
    out << "source,dest,initial,cost,hops,max_height,path\n";
    report_line(out, net, ap, src, stack, dest);
}

void cmd_oracle_check(const OracleOptions& opt) {
    const Network net = load_network(opt.net_path);
    std::string text = opt.path_text;
    if (!opt.path_file.empty()) {
        std::ifstream in(opt.path_file);
        if (!in) {
            throw std::runtime_error("cannot read " + opt.path_file);
        }
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    const FeasiblePath path = parse_path(text, net);
    const PathCheck check = feasible_check(net, path);

    std::ofstream file;
    std::ostream& out = output_stream(opt.out, file);
    if (check.feasible) {
        out << "feasible,cost=" << check.cost << ",final="
            << to_string(check.final_stack, net.protocols()) << ",max_height=" << check.max_height
            << "\n";
    } else {
        out << "infeasible,index=" << check.failure_index << ",reason=" << check.reason << "\n";
    }
}

struct RouteOptions {
    std::string net_path;
    std::size_t h_max = 3;
    bool theoretical = false;
    std::string source;
    std::string dest;
    std::string stack_text;
    std::size_t budget = 1000;
    std::size_t max_rounds = 1'000'000;
    std::string out;
};

void cmd_route(const RouteOptions& opt) {
    const Network net = load_network(opt.net_path);
    const NodeId src = node_by_alias(net, opt.source).id;
    const NodeId dest = node_by_alias(net, opt.dest).id;
    const ProtocolStack stack = parse_stack(opt.stack_text, net.protocols());

    RunOptions run;
    run.h_max = opt.h_max;
    run.theoretical = opt.theoretical;
    SimResult sim;
    try {
        sim = run_to_quiescence(net, config_for(run), opt.max_rounds);
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        throw CliExit{kExitNoConvergence};
    }

    const ForwardTrace trace =
        end_to_end(net, sim.tables, src, make_packet(dest, src, stack), opt.budget);
    std::ofstream file;
    std::ostream& out = output_stream(opt.out, file);
    out << trace_csv(trace, net);
    if (trace.outcome == ForwardTrace::Outcome::BudgetExceeded) {
        std::cerr << "warning: hop budget exceeded before delivery or discard\n";
    }
}

struct ExperimentOptions {
    ExperimentSpec spec;
    std::string out;
};

void cmd_experiment(const ExperimentOptions& opt) {
    const ExperimentResult result = run_experiment(opt.spec);
    std::ofstream file;
    std::ostream& out = output_stream(opt.out, file);
    out << result.csv();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stack-vector routing with automatic tunneling"};
    app.require_subcommand(1);

    GenOptions gen;
    CLI::App* cmd_gen_app = app.add_subcommand("gen", "generate a random network file");
    cmd_gen_app->add_option("--n", gen.n, "number of nodes")->check(CLI::Range(2, 1 << 20));
    cmd_gen_app->add_option("--alpha", gen.alpha, "number of protocols")
        ->check(CLI::Range(2, 256));
    cmd_gen_app->add_option("--p", gen.p, "per-node function probability")
        ->check(CLI::Range(0.0, 1.0));
    cmd_gen_app->add_option("--m-attach", gen.m_attach, "links per added node");
    cmd_gen_app->add_option("--seed", gen.seed, "generator seed");
    cmd_gen_app->add_option("--out", gen.out, "output network file")->required();
    cmd_gen_app->callback([&] { cmd_gen(gen); });

    RunOptions run;
    CLI::App* cmd_run_app = app.add_subcommand("run", "build routing tables to quiescence");
    cmd_run_app->add_option("--net", run.net_path, "network file")->required();
    auto* run_h = cmd_run_app->add_option("--h-max", run.h_max, "advertised stack height cap")
                      ->check(CLI::Range(1, 1 << 20));
    cmd_run_app->add_flag("--theoretical", run.theoretical, "use the alpha n^2 cap")
        ->excludes(run_h);
    cmd_run_app->add_option("--max-rounds", run.max_rounds, "abort after this many rounds");
    cmd_run_app->add_option("--tables-out", run.tables_out, "routing table CSV path");
    cmd_run_app->add_option("--trace-out", run.trace_out, "event trace TSV path");
    cmd_run_app->callback([&] { cmd_run(run); });

    OracleOptions oracle;
    CLI::App* cmd_oracle_app =
        app.add_subcommand("oracle", "centralized reference computations");
    cmd_oracle_app->require_subcommand(1);

    CLI::App* ap_all = cmd_oracle_app->add_subcommand(
        "all-pairs", "shortest feasible routes for every pair");
    ap_all->add_option("--net", oracle.net_path, "network file")->required();
    ap_all->add_option("--h-max", oracle.h_max, "stack height cap");
    ap_all->add_option("--budget", oracle.budget, "state budget");
    ap_all->add_option("--out", oracle.out, "output CSV ('-' = stdout)");
    ap_all->callback([&] { cmd_oracle_all_pairs(oracle); });

    CLI::App* ap_query = cmd_oracle_app->add_subcommand("query", "one (source, stack, dest)");
    ap_query->add_option("--net", oracle.net_path, "network file")->required();
    ap_query->add_option("--h-max", oracle.h_max, "stack height cap");
    ap_query->add_option("--budget", oracle.budget, "state budget");
    ap_query->add_option("--source", oracle.source, "source node")->required();
    ap_query->add_option("--dest", oracle.dest, "destination node")->required();
    ap_query->add_option("--stack", oracle.stack_text, "bottom-to-top stack, e.g. ab")
        ->required();
    ap_query->add_option("--out", oracle.out, "output CSV ('-' = stdout)");
    ap_query->callback([&] { cmd_oracle_query(oracle); });

    CLI::App* ap_check =
        cmd_oracle_app->add_subcommand("check", "feasibility of a written path");
    ap_check->add_option("--net", oracle.net_path, "network file")->required();
    auto* path_file = ap_check->add_option("--path-file", oracle.path_file,
                                           "file with 'S (a->a) U1 ... D'");
    ap_check->add_option("--path", oracle.path_text, "inline path text")->excludes(path_file);
    ap_check->add_option("--out", oracle.out, "output ('-' = stdout)");
    ap_check->callback([&] { cmd_oracle_check(oracle); });

    RouteOptions route;
    CLI::App* cmd_route_app =
        app.add_subcommand("route", "trace one packet over converged tables");
    cmd_route_app->add_option("--net", route.net_path, "network file")->required();
    auto* route_h = cmd_route_app->add_option("--h-max", route.h_max, "stack height cap");
    cmd_route_app->add_flag("--theoretical", route.theoretical, "use the alpha n^2 cap")
        ->excludes(route_h);
    cmd_route_app->add_option("--source", route.source, "injection node")->required();
    cmd_route_app->add_option("--dest", route.dest, "destination node")->required();
    cmd_route_app->add_option("--stack", route.stack_text, "initial stack")->required();
    cmd_route_app->add_option("--hop-budget", route.budget, "max hops before giving up");
    cmd_route_app->add_option("--max-rounds", route.max_rounds, "convergence round cap");
    cmd_route_app->add_option("--out", route.out, "output CSV ('-' = stdout)");
    cmd_route_app->callback([&] { cmd_route(route); });

    ExperimentOptions exp;
    exp.spec.p_list.clear();
    exp.spec.h_max_list.clear();
    CLI::App* cmd_exp_app = app.add_subcommand("experiment", "parameter sweep, CSV per run");
    cmd_exp_app->add_option("--n", exp.spec.n, "nodes per network");
    cmd_exp_app->add_option("--alpha", exp.spec.alpha, "protocols")->check(CLI::Range(2, 256));
    cmd_exp_app->add_option("--p", exp.spec.p_list, "function probabilities (repeatable)")
        ->required();
    cmd_exp_app->add_option("--h-max", exp.spec.h_max_list, "height caps (repeatable)")
        ->required();
    cmd_exp_app->add_option("--runs", exp.spec.runs, "networks per (p, h_max) cell");
    cmd_exp_app->add_option("--seed", exp.spec.seed, "master seed");
    cmd_exp_app->add_option("--m-attach", exp.spec.m_attach, "links per added node");
    cmd_exp_app->add_flag("--diameter", exp.spec.with_diameter, "also compute diam per run");
    bool no_oracle = false;
    cmd_exp_app->add_flag("--no-oracle", no_oracle, "skip the reference columns");
    cmd_exp_app->add_option("--jobs", exp.spec.jobs, "worker threads");
    cmd_exp_app->add_option("--out", exp.out, "output CSV ('-' = stdout)");
    cmd_exp_app->callback([&] {
        exp.spec.with_oracle = !no_oracle;
        cmd_experiment(exp);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const CliExit& e) {
        return e.code;
    } catch (const OracleBudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOracleBudget;
    } catch (const NetworkParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
