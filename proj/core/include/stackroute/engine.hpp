#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "stackroute/network.hpp"
#include "stackroute/protocol.hpp"

namespace stackroute {

/// A route advertisement: "I can deliver to `dest` a packet carrying
/// `stack` at cost `cost`".
struct ControlMessage {
    NodeId dest;
    ProtocolStack stack;
    Cost cost = 0;

    bool operator==(const ControlMessage&) const = default;
};

/// Wire form: dest 16B | stack height 1B | protocol ids top-first |
/// cost 8B big-endian. Size is 25 + height bytes.
std::vector<std::uint8_t> encode(const ControlMessage& msg);
ControlMessage decode_control_message(std::span<const std::uint8_t> bytes);
std::size_t encoded_size(const ControlMessage& msg);

/// One routing table row. The key is (dest, stack); the stored function is
/// what this node applies to a matching packet before sending it to
/// next_hop.
struct RoutingRow {
    NodeId dest;
    ProtocolStack stack;
    Cost cost = 0;
    NodeId next_hop;
    AdaptationFunction function;

    bool operator==(const RoutingRow&) const = default;
};

/// Routing table keyed by (destination, protocol stack). Costs for an
/// existing key only ever decrease.
class RoutingTable {
  public:
    using Key = std::pair<NodeId, ProtocolStack>;

    /// Insert-or-improve. Returns true when the table changed: the key was
    /// new or the new cost is strictly lower. Equal cost never overwrites.
    bool add(const RoutingRow& row);

    const RoutingRow* lookup(const NodeId& dest, const ProtocolStack& stack) const;

    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

    bool operator==(const RoutingTable&) const = default;

  private:
    std::map<Key, RoutingRow> rows_;
};

/// h_max policy. Bounded uses the configured cap; Theoretical uses
/// alpha * n^2, the height that is always sufficient for shortest paths.
struct EngineConfig {
    enum class Mode { Bounded, Theoretical };

    Mode mode = Mode::Bounded;
    std::size_t h_max = 3;

    std::size_t effective_h_max(std::size_t alpha, std::size_t n) const {
        return mode == Mode::Theoretical ? alpha * n * n : h_max;
    }
    std::size_t effective_h_max(const Network& net) const {
        return effective_h_max(net.protocol_count(), net.node_count());
    }

    static EngineConfig bounded(std::size_t h_max) {
        return {Mode::Bounded, h_max};
    }
    static EngineConfig theoretical() {
        return {Mode::Theoretical, 1};
    }
};

/// Control-plane state of one node: capabilities snapshot plus the table.
struct NodeState {
    NodeId id;
    std::vector<AdaptationFunction> functions;  // canonical order
    std::vector<NodeId> neighbors;              // sorted
    std::vector<ProtocolId> in_set;             // sorted
    RoutingTable table;

    static NodeState from(const Network& net, const NodeId& id);
};

using Emission = std::pair<NodeId, ControlMessage>;

/// Startup advertisements: (U, [x], 0) to every neighbor for every
/// x in In(U). Creates no local rows; self-delivery is a dataplane rule.
std::vector<Emission> init_node(const NodeState& state);

/// Outcome of one table mutation, for tracing.
struct RowChange {
    bool inserted = false;  // false = cost-improving update
    RoutingRow row;
};

/// Core receive step: for every f in F(U) whose reverse applies to the
/// advertised stack within the height cap, try to install
/// (dest, reverse(f)(stack), cost + w(U, f, from), from, f); re-advertise
/// each installed or improved row to every neighbor, `from` included.
/// Emissions are ordered by (function canonical order, neighbor id).
std::vector<Emission> handle_message(NodeState& state, const ControlMessage& msg,
                                     const NodeId& from, const Network& net,
                                     const EngineConfig& cfg,
                                     std::vector<RowChange>* changes = nullptr);

/// Exact-key lookup; nullptr means no route for (dest, stack).
inline const RoutingRow* lookup(const RoutingTable& table, const NodeId& dest,
                                const ProtocolStack& stack) {
    return table.lookup(dest, stack);
}

}  // namespace stackroute
