#include "stackroute/simulator.hpp"

#include <algorithm>
#include <sstream>

namespace stackroute {

const char* to_string(TraceEvent::Kind kind) {
    switch (kind) {
        case TraceEvent::Kind::Send:
            return "SEND";
        case TraceEvent::Kind::Recv:
            return "RECV";
        case TraceEvent::Kind::RowInsert:
            return "ROW_INSERT";
        case TraceEvent::Kind::RowUpdate:
            return "ROW_UPDATE";
    }
    return "?";
}

std::string format_trace_line(const TraceEvent& event, const Network& net) {
    std::ostringstream out;
    out << event.round << '\t' << to_string(event.kind) << '\t' << net.node_name(event.node)
        << '\t' << net.node_name(event.peer) << '\t' << net.node_name(event.dest) << '\t'
        << to_string(event.stack, net.protocols()) << '\t' << event.cost;
    return out.str();
}

Simulation::Simulation(const Network& net, EngineConfig cfg, TraceSink sink)
    : net_(net), cfg_(cfg), sink_(std::move(sink)), started_(std::chrono::steady_clock::now()) {
    nodes_.reserve(net.node_count());
    for (const auto& [id, spec] : net.nodes()) {
        index_.emplace(id, nodes_.size());
        nodes_.push_back(NodeState::from(net, id));
    }
    next_inbox_.resize(nodes_.size());

    // Round 0: initialization advertisements, delivered in round 1.
    for (const NodeState& state : nodes_) {
        for (const Emission& emission : init_node(state)) {
            enqueue(0, state.id, emission);
        }
    }
}

std::size_t Simulation::index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw std::invalid_argument("unknown node in simulation: " + id.alias());
    }
    return it->second;
}

void Simulation::enqueue(std::size_t round, const NodeId& from, const Emission& emission) {
    const auto& [to, msg] = emission;
    next_inbox_[index_of(to)].push_back({from, msg});
    ++in_flight_;
    ++metrics_.total_messages;
    metrics_.max_message_stack_height =
        std::max(metrics_.max_message_stack_height, msg.stack.height());
    if (sink_) {
        sink_({round, TraceEvent::Kind::Send, from, to, msg.dest, msg.stack, msg.cost});
    }
}

void Simulation::step_round() {
    if (quiescent()) {
        return;
    }
    ++round_;
    std::vector<std::vector<Delivery>> inbox(nodes_.size());
    inbox.swap(next_inbox_);
    in_flight_ = 0;

    std::vector<RowChange> changes;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        NodeState& state = nodes_[i];
        for (const Delivery& d : inbox[i]) {
            if (sink_) {
                sink_({round_, TraceEvent::Kind::Recv, state.id, d.from, d.msg.dest, d.msg.stack,
                       d.msg.cost});
            }
            changes.clear();
            const auto emissions =
                handle_message(state, d.msg, d.from, net_, cfg_, sink_ ? &changes : nullptr);
            if (sink_) {
                for (const RowChange& c : changes) {
                    sink_({round_,
                           c.inserted ? TraceEvent::Kind::RowInsert : TraceEvent::Kind::RowUpdate,
                           state.id, c.row.next_hop, c.row.dest, c.row.stack, c.row.cost});
                }
            }
            for (const Emission& emission : emissions) {
                enqueue(round_, state.id, emission);
            }
        }
    }
    metrics_.rounds_to_quiescence = round_;
}

const RoutingTable& Simulation::table(const NodeId& id) const {
    return nodes_[index_of(id)].table;
}

std::map<NodeId, RoutingTable> Simulation::tables() const {
    std::map<NodeId, RoutingTable> out;
    for (const NodeState& state : nodes_) {
        out.emplace(state.id, state.table);
    }
    return out;
}

SimMetrics Simulation::metrics() const {
    SimMetrics m = metrics_;
    for (const NodeState& state : nodes_) {
        m.table_rows[state.id] = state.table.size();
    }
    m.wall_time = std::chrono::steady_clock::now() - started_;
    return m;
}

SimResult run_to_quiescence(const Network& net, const EngineConfig& cfg, std::size_t max_rounds,
                            TraceSink sink) {
    Simulation sim(net, cfg, std::move(sink));
    while (!sim.quiescent()) {
        if (sim.round() >= max_rounds) {
            throw NonConvergenceError(
                "no quiescence within " + std::to_string(max_rounds) + " rounds",
                {sim.tables(), sim.metrics()});
        }
        sim.step_round();
    }
    return {sim.tables(), sim.metrics()};
}

std::string dump_tables_csv(const Network& net, const std::map<NodeId, RoutingTable>& tables) {
    std::ostringstream out;
    out << "node,dest,stack,cost,next_hop,function\n";
    for (const auto& [id, table] : tables) {
        for (const auto& [key, row] : table) {
            out << net.node_name(id) << ',' << net.node_name(row.dest) << ','
                << to_string(row.stack, net.protocols()) << ',' << row.cost << ','
                << net.node_name(row.next_hop) << ",\""
                << to_string(row.function, net.protocols()) << "\"\n";
        }
    }
    return out.str();
}

BoundCheck convergence_bound_check(const SimMetrics& metrics, const Network& net,
                                   const EngineConfig& cfg, std::size_t diam) {
    const std::size_t n = net.node_count();
    const std::size_t alpha = net.protocol_count();
    const std::size_t height = std::min(cfg.effective_h_max(net), alpha * n * n);
    BoundCheck check;
    check.bound = (height + 1) * (diam + 2) + 2;
    check.rounds = metrics.rounds_to_quiescence;
    check.ok = check.rounds <= check.bound;
    return check;
}

}  // namespace stackroute
