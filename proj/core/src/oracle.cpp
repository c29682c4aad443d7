#include "stackroute/oracle.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <sstream>

namespace stackroute {

PathCheck feasible_check(const Network& net, const FeasiblePath& path) {
    if (path.functions.empty() || path.nodes.size() != path.functions.size() + 1) {
        throw std::invalid_argument(
            "feasible_check: path must alternate n+1 nodes with n functions");
    }
    if (path.initial.empty()) {
        throw std::invalid_argument("feasible_check: empty initial stack");
    }

    PathCheck check;
    check.max_height = path.initial.height();

    ProtocolStack stack = path.initial;
    Cost cost = 0;
    for (std::size_t i = 0; i < path.functions.size(); ++i) {
        const NodeId& here = path.nodes[i];
        const NodeId& next = path.nodes[i + 1];
        const AdaptationFunction& f = path.functions[i];

        const NodeSpec* spec = net.find_node(here);
        if (!spec) {
            check.failure_index = i;
            check.reason = "unknown node " + here.alias();
            return check;
        }
        if (!net.has_edge(here, next)) {
            check.failure_index = i;
            check.reason = "no edge (" + net.node_name(here) + ", " + net.node_name(next) + ")";
            return check;
        }
        if (!spec->has_function(f)) {
            check.failure_index = i;
            check.reason = "function " + to_string(f, net.protocols()) + " not in F(" +
                           spec->alias + ")";
            return check;
        }
        auto applied = apply(f, stack);
        if (!applied) {
            check.failure_index = i;
            check.reason = "function " + to_string(f, net.protocols()) +
                           " cannot handle stack " + to_string(stack, net.protocols());
            return check;
        }
        stack = std::move(*applied);
        check.stacks.push_back(stack);
        check.max_height = std::max(check.max_height, stack.height());
        cost = checked_cost_add(cost, net.weight(here, f, next));
    }

    const NodeSpec& dest = net.node(path.nodes.back());
    const auto in = dest.in_set();
    if (stack.height() != 1 || !std::binary_search(in.begin(), in.end(), stack.top())) {
        check.failure_index = path.functions.size();
        check.reason = "terminal stack " + to_string(stack, net.protocols()) +
                       " not a single protocol in In(" + dest.alias + ")";
        return check;
    }

    check.feasible = true;
    check.final_stack = std::move(stack);
    check.cost = cost;
    return check;
}

// ---------------------------------------------------------------------------
// Backward label-setting search per destination

namespace {

struct QueueItem {
    Cost cost;
    std::size_t hops;
    NodeId node;
    ProtocolStack stack;

    // min-heap on (cost, hops), deterministic tail for equal labels
    bool operator>(const QueueItem& o) const {
        return std::tie(cost, hops, node, stack) > std::tie(o.cost, o.hops, o.node, o.stack);
    }
};

void search_destination(const Network& net, std::size_t h_max, const NodeId& dest,
                        AllPairs::StateMap& reach, AllPairs::StateMap& rows,
                        std::uint64_t& settled, std::uint64_t budget) {
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> queue;
    std::map<AllPairs::StateKey, bool> done;

    const NodeSpec& dspec = net.node(dest);
    for (ProtocolId x : dspec.in_set()) {
        AllPairs::Info info;
        info.accepting = true;
        auto key = AllPairs::StateKey{dest, ProtocolStack::single(x)};
        reach.emplace(key, info);
        queue.push({0, 0, key.first, key.second});
    }

    while (!queue.empty()) {
        QueueItem item = queue.top();
        queue.pop();
        auto key = AllPairs::StateKey{item.node, item.stack};
        if (done[key]) {
            continue;
        }
        done[key] = true;
        if (++settled > budget) {
            throw OracleBudgetError("all_pairs: state budget of " + std::to_string(budget) +
                                    " exceeded (h_max " + std::to_string(h_max) + ")");
        }

        // Relax into predecessors: a neighbor U holding reverse(f)(stack)
        // can apply f and hand the packet to this state.
        for (const NodeId& u : net.neighbors(item.node)) {
            for (const AdaptationFunction& f : net.node(u).functions) {
                auto h0 = apply(reverse(f), item.stack);
                if (!h0 || h0->height() > h_max) {
                    continue;
                }
                const Cost cost = checked_cost_add(item.cost, net.weight(u, f, item.node));
                const std::size_t hops = item.hops + 1;
                auto pred = AllPairs::StateKey{u, std::move(*h0)};
                auto it = reach.find(pred);
                if (it == reach.end() ||
                    std::tie(cost, hops) < std::tie(it->second.cost, it->second.hops)) {
                    AllPairs::Info info;
                    info.cost = cost;
                    info.hops = hops;
                    info.via_function = f;
                    info.via_next = item.node;
                    if (it == reach.end()) {
                        reach.emplace(pred, info);
                    } else if (!it->second.accepting) {
                        it->second = info;
                    } else {
                        continue;  // accepting labels stay at 0
                    }
                    queue.push({cost, hops, pred.first, pred.second});
                }
            }
        }
    }

    // Engine-comparable entries for the accepting keys: the best route
    // that leaves dest and loops back, mirroring a received advertisement.
    for (const auto& [key, info] : reach) {
        if (!info.accepting) {
            continue;
        }
        std::optional<AllPairs::Info> best;
        for (const AdaptationFunction& f : dspec.functions) {
            auto h1 = apply(f, key.second);
            if (!h1 || h1->height() > h_max) {
                continue;
            }
            for (const NodeId& v : net.neighbors(dest)) {
                auto it = reach.find({v, *h1});
                if (it == reach.end()) {
                    continue;
                }
                AllPairs::Info cand;
                cand.cost = checked_cost_add(it->second.cost, net.weight(dest, f, v));
                cand.hops = it->second.hops + 1;
                cand.via_function = f;
                cand.via_next = v;
                if (!best || std::tie(cand.cost, cand.hops) < std::tie(best->cost, best->hops)) {
                    best = cand;
                }
            }
        }
        if (best) {
            rows.emplace(key, *best);
        }
    }
}

}  // namespace

std::optional<Cost> AllPairs::distance(const NodeId& from, const ProtocolStack& stack,
                                       const NodeId& dest) const {
    const Info* info = find(from, stack, dest);
    return info ? std::optional<Cost>(info->cost) : std::nullopt;
}

const AllPairs::Info* AllPairs::find(const NodeId& from, const ProtocolStack& stack,
                                     const NodeId& dest) const {
    auto dit = reach_.find(dest);
    if (dit == reach_.end()) {
        return nullptr;
    }
    auto it = dit->second.find({from, stack});
    return it == dit->second.end() ? nullptr : &it->second;
}

const AllPairs::StateMap& AllPairs::states(const NodeId& dest) const {
    static const StateMap kEmpty;
    auto it = reach_.find(dest);
    return it == reach_.end() ? kEmpty : it->second;
}

const AllPairs::Info* AllPairs::row_info(const NodeId& from, const ProtocolStack& stack,
                                         const NodeId& dest) const {
    const Info* info = find(from, stack, dest);
    if (!info) {
        return nullptr;
    }
    if (!info->accepting) {
        return info;
    }
    auto dit = accepting_rows_.find(dest);
    if (dit == accepting_rows_.end()) {
        return nullptr;
    }
    auto it = dit->second.find({from, stack});
    return it == dit->second.end() ? nullptr : &it->second;
}

AllPairs::StateMap AllPairs::engine_rows(const NodeId& dest) const {
    StateMap rows;
    auto dit = reach_.find(dest);
    if (dit == reach_.end()) {
        return rows;
    }
    for (const auto& [key, info] : dit->second) {
        if (!info.accepting) {
            rows.emplace(key, info);
        }
    }
    auto ait = accepting_rows_.find(dest);
    if (ait != accepting_rows_.end()) {
        for (const auto& [key, info] : ait->second) {
            rows.emplace(key, info);
        }
    }
    return rows;
}

FeasiblePath AllPairs::witness(const NodeId& from, const ProtocolStack& stack,
                               const NodeId& dest) const {
    const Info* info = row_info(from, stack, dest);
    if (!info) {
        throw std::invalid_argument("witness: no route from (" + from.alias() + ", stack) to " +
                                    dest.alias());
    }
    FeasiblePath path;
    path.initial = stack;
    path.nodes.push_back(from);

    ProtocolStack current = stack;
    while (true) {
        path.functions.push_back(info->via_function);
        path.nodes.push_back(info->via_next);
        auto applied = apply(info->via_function, current);
        if (!applied) {
            throw std::logic_error("witness: inconsistent label chain");
        }
        current = std::move(*applied);
        const Info* next = find(info->via_next, current, dest);
        if (!next) {
            throw std::logic_error("witness: dangling label chain");
        }
        if (next->accepting) {
            return path;
        }
        info = next;
    }
}

std::vector<NodeId> AllPairs::destinations() const {
    std::vector<NodeId> out;
    out.reserve(reach_.size());
    for (const auto& [dest, states] : reach_) {
        out.push_back(dest);
    }
    return out;
}

AllPairs all_pairs(const Network& net, std::size_t h_max, std::uint64_t state_budget) {
    if (h_max < 1) {
        throw std::invalid_argument("all_pairs: h_max must be >= 1");
    }
    AllPairs ap;
    ap.h_max_ = h_max;
    for (const auto& [id, spec] : net.nodes()) {
        if (spec.in_set().empty()) {
            continue;  // no accepting state, nothing can route there
        }
        search_destination(net, h_max, id, ap.reach_[id], ap.accepting_rows_[id], ap.settled_,
                           state_budget);
    }
    return ap;
}

AllPairs all_pairs_single(const Network& net, std::size_t h_max, const NodeId& dest,
                          std::uint64_t state_budget) {
    if (h_max < 1) {
        throw std::invalid_argument("all_pairs: h_max must be >= 1");
    }
    AllPairs ap;
    ap.h_max_ = h_max;
    if (!net.node(dest).in_set().empty()) {
        search_destination(net, h_max, dest, ap.reach_[dest], ap.accepting_rows_[dest],
                           ap.settled_, state_budget);
    }
    return ap;
}

// ---------------------------------------------------------------------------
// Exhaustive reference enumeration

namespace {

struct BruteForceContext {
    const Network& net;
    const NodeId& dest;
    std::size_t max_hops;
    std::uint64_t budget;
    ProtocolStack initial;
    std::uint64_t expansions = 0;
    std::vector<ProtocolId> dest_in;
    std::map<NodeId, std::size_t> graph_dist;  // plain hop distance to dest

    std::optional<BruteForceResult> best;
    std::vector<NodeId> nodes;
    std::vector<AdaptationFunction> functions;
};

bool candidate_improves(const BruteForceContext& ctx, Cost cost) {
    if (!ctx.best) {
        return true;
    }
    const FeasiblePath& b = *ctx.best->path;
    const Cost bcost = *ctx.best->cost;
    if (cost != bcost) {
        return cost < bcost;
    }
    if (ctx.functions.size() != b.functions.size()) {
        return ctx.functions.size() < b.functions.size();
    }
    if (ctx.nodes != b.nodes) {
        return ctx.nodes < b.nodes;
    }
    return ctx.functions < b.functions;
}

void explore(BruteForceContext& ctx, const NodeId& here, const ProtocolStack& stack, Cost cost) {
    if (++ctx.expansions > ctx.budget) {
        throw OracleBudgetError("brute_force: expansion budget of " +
                                std::to_string(ctx.budget) + " exceeded");
    }
    const std::size_t hops = ctx.functions.size();
    if (hops >= 1 && here == ctx.dest && stack.height() == 1 &&
        std::binary_search(ctx.dest_in.begin(), ctx.dest_in.end(), stack.top())) {
        if (candidate_improves(ctx, cost)) {
            FeasiblePath path;
            path.initial = ctx.initial;
            path.nodes = ctx.nodes;
            path.functions = ctx.functions;
            ctx.best = BruteForceResult{cost, std::move(path)};
        }
        // keep exploring: a longer continuation can never cost less, but
        // equal-cost ties are resolved on the full candidate set
    }
    if (hops == ctx.max_hops) {
        return;
    }
    for (const AdaptationFunction& f : ctx.net.node(here).functions) {
        auto next_stack = apply(f, stack);
        if (!next_stack) {
            continue;
        }
        for (const NodeId& v : ctx.net.neighbors(here)) {
            auto dit = ctx.graph_dist.find(v);
            if (dit == ctx.graph_dist.end() ||
                hops + 1 + dit->second > ctx.max_hops) {
                continue;  // cannot reach dest in the remaining hops
            }
            const Cost next_cost = checked_cost_add(cost, ctx.net.weight(here, f, v));
            if (ctx.best && next_cost > *ctx.best->cost) {
                continue;
            }
            ctx.nodes.push_back(v);
            ctx.functions.push_back(f);
            explore(ctx, v, *next_stack, next_cost);
            ctx.nodes.pop_back();
            ctx.functions.pop_back();
        }
    }
}

std::map<NodeId, std::size_t> hop_distances_to(const Network& net, const NodeId& dest) {
    std::map<NodeId, std::size_t> dist;
    std::deque<NodeId> frontier;
    dist[dest] = 0;
    frontier.push_back(dest);
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        for (const NodeId& v : net.neighbors(u)) {  // symmetric topology
            if (dist.emplace(v, dist[u] + 1).second) {
                frontier.push_back(v);
            }
        }
    }
    return dist;
}

}  // namespace

BruteForceResult brute_force(const Network& net, const NodeId& source, const NodeId& dest,
                             ProtocolId init, std::size_t max_hops, std::uint64_t budget) {
    if (max_hops < 1) {
        throw std::invalid_argument("brute_force: max_hops must be >= 1");
    }
    net.node(source);  // validate
    BruteForceContext ctx{net, dest, max_hops, budget, ProtocolStack::single(init)};
    ctx.dest_in = net.node(dest).in_set();
    ctx.graph_dist = hop_distances_to(net, dest);
    ctx.nodes.push_back(source);

    auto sit = ctx.graph_dist.find(source);
    if (ctx.dest_in.empty() || sit == ctx.graph_dist.end() || sit->second > max_hops) {
        return {};
    }

    explore(ctx, source, ctx.initial, 0);
    if (!ctx.best) {
        return {};
    }
    return std::move(*ctx.best);
}

std::optional<std::size_t> diameter(const AllPairs& ap) {
    std::optional<std::size_t> diam;
    for (const NodeId& dest : ap.destinations()) {
        for (const auto& [key, info] : ap.states(dest)) {
            if (key.first == dest || key.second.height() != 1) {
                continue;
            }
            if (!diam || info.hops > *diam) {
                diam = info.hops;
            }
        }
    }
    return diam;
}

std::optional<std::size_t> diameter(const Network& net, std::size_t h_max) {
    return diameter(all_pairs(net, h_max));
}

// ---------------------------------------------------------------------------
// Text form

std::string to_string(const FeasiblePath& path, const Network& net) {
    std::ostringstream out;
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        if (i > 0) {
            out << ' ';
        }
        out << net.node_name(path.nodes[i]);
        if (i < path.functions.size()) {
            const AdaptationFunction& f = path.functions[i];
            const std::string rendered = to_string(f, net.protocols());
            if (f.kind == FunctionKind::Decapsulation) {
                out << ' ' << rendered;  // already carries parentheses
            } else {
                out << " (" << rendered << ')';
            }
        }
    }
    return out.str();
}

FeasiblePath parse_path(std::string_view text, const Network& net) {
    std::vector<std::string> tokens;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) {
        tokens.push_back(token);
    }
    if (tokens.size() < 3 || tokens.size() % 2 == 0) {
        throw std::invalid_argument("parse_path: expected node (function) node ... node");
    }

    FeasiblePath path;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i % 2 == 0) {
            const NodeSpec* spec = net.find_node_by_alias(tokens[i]);
            if (!spec) {
                throw std::invalid_argument("parse_path: unknown node \"" + tokens[i] + "\"");
            }
            path.nodes.push_back(spec->id);
        } else {
            std::string_view t = tokens[i];
            if (t.starts_with("(") && t.ends_with(")") && !t.starts_with("~(")) {
                t = t.substr(1, t.size() - 2);
            }
            path.functions.push_back(parse_function(t, net.protocols()));
        }
    }

    const AdaptationFunction& first = path.functions.front();
    if (first.kind == FunctionKind::Decapsulation) {
        throw std::invalid_argument(
            "parse_path: the first function cannot be a decapsulation");
    }
    path.initial = ProtocolStack::single(first.x);
    return path;
}

}  // namespace stackroute
