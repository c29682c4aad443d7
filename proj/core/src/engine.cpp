#include "stackroute/engine.hpp"

#include <stdexcept>

namespace stackroute {

std::size_t encoded_size(const ControlMessage& msg) {
    return 16 + 1 + msg.stack.height() + 8;
}

std::vector<std::uint8_t> encode(const ControlMessage& msg) {
    const std::size_t h = msg.stack.height();
    if (h == 0 || h > 255) {
        throw std::invalid_argument("control message stack height must be in [1, 255]");
    }
    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(msg));
    out.insert(out.end(), msg.dest.bytes.begin(), msg.dest.bytes.end());
    out.push_back(static_cast<std::uint8_t>(h));
    for (std::size_t i = h; i-- > 0;) {  // top first
        out.push_back(msg.stack.at(i).value);
    }
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(msg.cost >> shift));
    }
    return out;
}

ControlMessage decode_control_message(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 26) {
        throw std::invalid_argument("control message truncated");
    }
    ControlMessage msg;
    std::copy(bytes.begin(), bytes.begin() + 16, msg.dest.bytes.begin());
    const std::size_t h = bytes[16];
    if (h == 0 || bytes.size() != 25 + h) {
        throw std::invalid_argument("control message has bad stack height");
    }
    std::vector<ProtocolId> items(h);
    for (std::size_t i = 0; i < h; ++i) {
        items[h - 1 - i] = ProtocolId{bytes[17 + i]};
    }
    msg.stack = ProtocolStack(std::move(items));
    msg.cost = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        msg.cost = (msg.cost << 8) | bytes[17 + h + i];
    }
    return msg;
}

bool RoutingTable::add(const RoutingRow& row) {
    auto [it, inserted] = rows_.try_emplace({row.dest, row.stack}, row);
    if (inserted) {
        return true;
    }
    if (it->second.cost > row.cost) {
        it->second = row;
        return true;
    }
    return false;
}

const RoutingRow* RoutingTable::lookup(const NodeId& dest, const ProtocolStack& stack) const {
    auto it = rows_.find({dest, stack});
    return it == rows_.end() ? nullptr : &it->second;
}

NodeState NodeState::from(const Network& net, const NodeId& id) {
    const NodeSpec& spec = net.node(id);
    NodeState state;
    state.id = id;
    state.functions = spec.functions;
    state.neighbors = net.neighbors(id);
    state.in_set = spec.in_set();
    return state;
}

std::vector<Emission> init_node(const NodeState& state) {
    std::vector<Emission> out;
    out.reserve(state.in_set.size() * state.neighbors.size());
    for (ProtocolId x : state.in_set) {
        for (const NodeId& v : state.neighbors) {
            out.emplace_back(v, ControlMessage{state.id, ProtocolStack::single(x), 0});
        }
    }
    return out;
}

std::vector<Emission> handle_message(NodeState& state, const ControlMessage& msg,
                                     const NodeId& from, const Network& net,
                                     const EngineConfig& cfg, std::vector<RowChange>* changes) {
    const std::size_t h_cap = cfg.effective_h_max(net);
    std::vector<Emission> out;
    for (const AdaptationFunction& f : state.functions) {
        // A node that can apply f to H0 can accept a packet carrying H0
        // whenever the neighbor handles f(H0) = msg.stack.
        auto h0 = apply(reverse(f), msg.stack);
        if (!h0 || h0->height() > h_cap) {
            continue;
        }
        const Cost cost = checked_cost_add(msg.cost, net.weight(state.id, f, from));
        RoutingRow row{msg.dest, std::move(*h0), cost, from, f};
        const bool existed = state.table.lookup(row.dest, row.stack) != nullptr;
        if (!state.table.add(row)) {
            continue;
        }
        if (changes) {
            changes->push_back({!existed, row});
        }
        for (const NodeId& w : state.neighbors) {  // no split horizon
            out.emplace_back(w, ControlMessage{row.dest, row.stack, row.cost});
        }
    }
    return out;
}

}  // namespace stackroute
