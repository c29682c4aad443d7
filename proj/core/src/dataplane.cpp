#include "stackroute/dataplane.hpp"

#include <algorithm>
#include <sstream>

namespace stackroute {

Packet make_packet(const NodeId& dest, const NodeId& source, const ProtocolStack& stack,
                   std::vector<std::uint8_t> payload) {
    Packet p;
    p.dest = dest;
    p.source = source;
    p.proto_stack = stack;
    p.payload = std::move(payload);
    p.headers.reserve(stack.height());
    for (std::size_t i = stack.height(); i-- > 0;) {  // top first
        p.headers.push_back({stack.at(i).value});
    }
    return p;
}

std::size_t encoded_size(const Packet& p) {
    std::size_t size = 16 + 16 + 1 + p.proto_stack.height();
    for (const auto& h : p.headers) {
        size += 2 + h.size();
    }
    return size + p.payload.size();
}

std::vector<std::uint8_t> encode(const Packet& p) {
    const std::size_t height = p.proto_stack.height();
    if (height == 0 || height > 255) {
        throw std::invalid_argument("packet stack height must be in [1, 255]");
    }
    if (p.headers.size() != height) {
        throw std::invalid_argument("packet header stack out of lockstep with id stack");
    }
    for (const auto& h : p.headers) {
        if (h.size() > 0xffff) {
            throw std::invalid_argument("packet header exceeds 65535 bytes");
        }
    }

    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(p));
    out.insert(out.end(), p.dest.bytes.begin(), p.dest.bytes.end());
    out.insert(out.end(), p.source.bytes.begin(), p.source.bytes.end());
    out.push_back(static_cast<std::uint8_t>(height));
    for (std::size_t i = height; i-- > 0;) {  // id stack, top first
        out.push_back(p.proto_stack.at(i).value);
    }
    for (const auto& h : p.headers) {
        out.push_back(static_cast<std::uint8_t>(h.size() >> 8));
        out.push_back(static_cast<std::uint8_t>(h.size() & 0xff));
        out.insert(out.end(), h.begin(), h.end());
    }
    out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

Packet decode_packet(std::span<const std::uint8_t> bytes) {
    std::size_t at = 0;
    auto need = [&](std::size_t n, const char* what) {
        if (bytes.size() - at < n) {
            throw PacketParseError(std::string("truncated packet: ") + what, at);
        }
    };

    Packet p;
    need(16, "destination");
    std::copy_n(bytes.begin(), 16, p.dest.bytes.begin());
    at = 16;
    need(16, "source");
    std::copy_n(bytes.begin() + 16, 16, p.source.bytes.begin());
    at = 32;
    need(1, "stack height");
    const std::size_t height = bytes[at];
    if (height == 0) {
        throw PacketParseError("packet stack height is zero", at);
    }
    at = 33;

    need(height, "protocol id stack");
    std::vector<ProtocolId> items(height);
    for (std::size_t i = 0; i < height; ++i) {
        items[height - 1 - i] = ProtocolId{bytes[at + i]};
    }
    p.proto_stack = ProtocolStack(std::move(items));
    at += height;

    p.headers.reserve(height);
    for (std::size_t i = 0; i < height; ++i) {
        need(2, "header length");
        const std::size_t len = (static_cast<std::size_t>(bytes[at]) << 8) | bytes[at + 1];
        at += 2;
        need(len, "header bytes");
        p.headers.emplace_back(bytes.begin() + at, bytes.begin() + at + len);
        at += len;
    }

    p.payload.assign(bytes.begin() + at, bytes.end());
    return p;
}

ForwardAction forward(const NodeId& self, const RoutingTable& table,
                      const std::vector<ProtocolId>& in_set, const Packet& p) {
    if (p.dest == self && p.proto_stack.height() == 1 &&
        std::binary_search(in_set.begin(), in_set.end(), p.proto_stack.top())) {
        ForwardAction action;
        action.kind = ForwardAction::Kind::Deliver;
        action.packet = p;
        return action;
    }

    const RoutingRow* row = table.lookup(p.dest, p.proto_stack);
    if (!row) {
        return {};  // no route, discard
    }

    auto rewritten = apply(row->function, p.proto_stack);
    if (!rewritten) {
        throw RouteCorruptionError("routing row function is inapplicable to the packet stack");
    }

    ForwardAction action;
    action.kind = ForwardAction::Kind::Forward;
    action.next_hop = row->next_hop;
    action.function = row->function;
    action.packet = p;
    action.packet.proto_stack = std::move(*rewritten);
    switch (row->function.kind) {
        case FunctionKind::Conversion:
            action.packet.headers.front() = {row->function.y.value};
            break;
        case FunctionKind::Encapsulation:
            action.packet.headers.insert(action.packet.headers.begin(),
                                         {row->function.y.value});
            break;
        case FunctionKind::Decapsulation:
            action.packet.headers.erase(action.packet.headers.begin());
            break;
    }
    return action;
}

std::vector<NodeId> ForwardTrace::node_sequence() const {
    std::vector<NodeId> out;
    out.reserve(hops.size());
    for (const TraceHop& h : hops) {
        out.push_back(h.node);
    }
    return out;
}

ForwardTrace end_to_end(const Network& net, const std::map<NodeId, RoutingTable>& tables,
                        const NodeId& source, Packet packet, std::size_t hop_budget) {
    static const RoutingTable kEmptyTable;

    ForwardTrace trace;
    NodeId here = source;
    Cost cost = 0;

    for (std::size_t hop = 0;; ++hop) {
        auto tit = tables.find(here);
        const RoutingTable& table = tit == tables.end() ? kEmptyTable : tit->second;
        const NodeSpec& spec = net.node(here);

        TraceHop entry{here, packet.proto_stack, TraceHop::Action::Forward, cost};
        ForwardAction action = forward(here, table, spec.in_set(), packet);
        switch (action.kind) {
            case ForwardAction::Kind::Deliver:
                entry.action = TraceHop::Action::Deliver;
                trace.hops.push_back(std::move(entry));
                trace.outcome = ForwardTrace::Outcome::Delivered;
                trace.total_cost = cost;
                trace.hop_count = hop;
                return trace;
            case ForwardAction::Kind::Discard:
                entry.action = TraceHop::Action::Discard;
                trace.hops.push_back(std::move(entry));
                trace.outcome = ForwardTrace::Outcome::Discarded;
                trace.total_cost = cost;
                trace.hop_count = hop;
                return trace;
            case ForwardAction::Kind::Forward:
                break;
        }

        trace.hops.push_back(std::move(entry));
        if (hop == hop_budget) {
            trace.outcome = ForwardTrace::Outcome::BudgetExceeded;
            trace.total_cost = cost;
            trace.hop_count = hop;
            return trace;
        }
        cost = checked_cost_add(cost, net.weight(here, action.function, action.next_hop));
        here = action.next_hop;
        packet = std::move(action.packet);
    }
}

std::string trace_csv(const ForwardTrace& trace, const Network& net) {
    std::ostringstream out;
    out << "hop,node,stack,action,cost_so_far\n";
    for (std::size_t i = 0; i < trace.hops.size(); ++i) {
        const TraceHop& h = trace.hops[i];
        const char* action = h.action == TraceHop::Action::Deliver    ? "deliver"
                             : h.action == TraceHop::Action::Discard  ? "discard"
                                                                      : "forward";
        out << i << ',' << net.node_name(h.node) << ','
            << to_string(h.stack, net.protocols()) << ',' << action << ',' << h.cost_so_far
            << '\n';
    }
    return out.str();
}

}  // namespace stackroute
