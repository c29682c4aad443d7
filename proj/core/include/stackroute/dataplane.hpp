#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackroute/engine.hpp"
#include "stackroute/network.hpp"
#include "stackroute/oracle.hpp"

namespace stackroute {

/// A routable packet: the layered meta-header plus opaque payload. The
/// header stack is ordered top-first and stays in lockstep with the
/// protocol id stack (one header per stack entry).
struct Packet {
    NodeId dest;
    NodeId source;
    ProtocolStack proto_stack;
    std::vector<std::vector<std::uint8_t>> headers;  // top-first
    std::vector<std::uint8_t> payload;

    bool operator==(const Packet&) const = default;
};

/// Packet with deterministic synthetic headers (one byte per layer, equal
/// to the layer's protocol id).
Packet make_packet(const NodeId& dest, const NodeId& source, const ProtocolStack& stack,
                   std::vector<std::uint8_t> payload = {});

struct PacketParseError : std::runtime_error {
    PacketParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset(offset) {}

    std::size_t offset;
};

/// Layout: dest 16B | source 16B | height 1B | protocol ids top-first |
/// per header top-first (length 2B big-endian, bytes) | payload.
/// Size is exactly 34 + height + sum(2 + len_i) + |payload|.
std::vector<std::uint8_t> encode(const Packet& p);
Packet decode_packet(std::span<const std::uint8_t> bytes);
std::size_t encoded_size(const Packet& p);

/// Raised when a routing table row cannot be applied to the packet it
/// matched; the control plane guarantees this never happens, so it is
/// surfaced loudly instead of silently discarding.
struct RouteCorruptionError : std::logic_error {
    explicit RouteCorruptionError(const std::string& what) : std::logic_error(what) {}
};

struct ForwardAction {
    enum class Kind { Deliver, Forward, Discard };

    Kind kind = Kind::Discard;
    NodeId next_hop;              // Forward only
    Packet packet;                // Forward: the rewritten packet
    AdaptationFunction function;  // Forward: the row's function
};

/// One routing decision at node `self`: deliver when the packet is
/// addressed here with a bare receivable protocol, otherwise follow the
/// (dest, stack) row, rewriting the id and header stacks; no row means
/// discard. A packet addressed here with a taller stack is still
/// forwarded (it may be looping through a tunnel on purpose).
ForwardAction forward(const NodeId& self, const RoutingTable& table,
                      const std::vector<ProtocolId>& in_set, const Packet& p);

struct TraceHop {
    NodeId node;
    ProtocolStack stack;  // as presented to the node
    enum class Action { Forward, Deliver, Discard } action = Action::Forward;
    Cost cost_so_far = 0;
};

struct ForwardTrace {
    enum class Outcome { Delivered, Discarded, BudgetExceeded };

    Outcome outcome = Outcome::Discarded;
    std::vector<TraceHop> hops;  // one entry per visited node
    Cost total_cost = 0;
    std::size_t hop_count = 0;  // edges traversed

    std::vector<NodeId> node_sequence() const;
};

/// Walks a packet from `source` across the converged tables, accumulating
/// the cost of every (node, function, next) triple it uses. With strictly
/// positive weights and quiescent tables this terminates and the total
/// equals the source row's cost.
ForwardTrace end_to_end(const Network& net, const std::map<NodeId, RoutingTable>& tables,
                        const NodeId& source, Packet packet, std::size_t hop_budget);

/// CSV rendering: hop,node,stack,action,cost_so_far.
std::string trace_csv(const ForwardTrace& trace, const Network& net);

}  // namespace stackroute
