#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackroute/engine.hpp"
#include "stackroute/network.hpp"

namespace stackroute {

struct SimMetrics {
    /// Index of the last round that delivered at least one message.
    std::size_t rounds_to_quiescence = 0;
    std::uint64_t total_messages = 0;
    std::size_t max_message_stack_height = 0;
    std::map<NodeId, std::size_t> table_rows;
    std::chrono::duration<double> wall_time{0};  // informational only
};

struct TraceEvent {
    enum class Kind { Send, Recv, RowInsert, RowUpdate };

    std::size_t round = 0;
    Kind kind = Kind::Send;
    NodeId node;  // sender for Send, receiver for Recv, owner for Row*
    NodeId peer;  // receiver for Send, sender for Recv, next hop for Row*
    NodeId dest;
    ProtocolStack stack;
    Cost cost = 0;
};

using TraceSink = std::function<void(const TraceEvent&)>;

const char* to_string(TraceEvent::Kind kind);
std::string format_trace_line(const TraceEvent& event, const Network& net);

/// Synchronized-round execution: every message sent in round t is
/// delivered in round t + 1; within a round nodes run in NodeId order and
/// each inbox preserves (sender order, emission order). Fully
/// deterministic for a given network and configuration.
class Simulation {
  public:
    Simulation(const Network& net, EngineConfig cfg, TraceSink sink = nullptr);

    /// One synchronized round: deliver everything in flight, collect the
    /// next round's messages. No-op when already quiescent.
    void step_round();

    bool quiescent() const { return in_flight_ == 0; }
    std::size_t round() const { return round_; }

    const RoutingTable& table(const NodeId& id) const;
    std::map<NodeId, RoutingTable> tables() const;
    SimMetrics metrics() const;

  private:
    struct Delivery {
        NodeId from;
        ControlMessage msg;
    };

    void enqueue(std::size_t round, const NodeId& from, const Emission& emission);
    std::size_t index_of(const NodeId& id) const;

    const Network& net_;
    EngineConfig cfg_;
    TraceSink sink_;
    std::vector<NodeState> nodes_;           // NodeId order
    std::map<NodeId, std::size_t> index_;
    std::vector<std::vector<Delivery>> next_inbox_;
    std::size_t in_flight_ = 0;
    std::size_t round_ = 0;
    SimMetrics metrics_;
    std::chrono::steady_clock::time_point started_;
};

struct SimResult {
    std::map<NodeId, RoutingTable> tables;
    SimMetrics metrics;
};

struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(std::string what, SimResult partial)
        : std::runtime_error(std::move(what)), partial(std::move(partial)) {}

    SimResult partial;
};

/// Runs rounds until no message is in flight. Throws NonConvergenceError
/// (carrying the partial tables) if quiescence is not reached within
/// max_rounds; that indicates a bug or a cost overflow, not a valid input.
SimResult run_to_quiescence(const Network& net, const EngineConfig& cfg,
                            std::size_t max_rounds, TraceSink sink = nullptr);

/// CSV dump, one row per table entry: node,dest,stack,cost,next_hop,function.
/// Sorted, so equal tables dump byte-identically.
std::string dump_tables_csv(const Network& net, const std::map<NodeId, RoutingTable>& tables);

struct BoundCheck {
    bool ok = true;
    std::size_t bound = 0;
    std::size_t rounds = 0;
};

/// Concrete form of the convergence guarantee: quiescence within
/// (min(h_max, alpha*n^2) + 1) * (diam + 2) + 2 rounds. Exceeding it is
/// reported, not asserted; the guarantee is asymptotic and these constants
/// are deliberately generous.
BoundCheck convergence_bound_check(const SimMetrics& metrics, const Network& net,
                                   const EngineConfig& cfg, std::size_t diam);

}  // namespace stackroute
