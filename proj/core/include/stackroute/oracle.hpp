#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackroute/network.hpp"
#include "stackroute/protocol.hpp"

namespace stackroute {

/// A function-labelled walk: functions[i] is applied at nodes[i] before the
/// hop to nodes[i + 1]. `initial` is the stack presented at the first node;
/// height 1 for ordinary source-emitted paths, taller for mid-tunnel
/// continuations.
struct FeasiblePath {
    ProtocolStack initial;
    std::vector<NodeId> nodes;
    std::vector<AdaptationFunction> functions;

    std::size_t hops() const { return functions.size(); }
};

/// Verdict of checking a candidate path against a network: either the
/// final stack, total cost and maximum stack height, or the first step
/// where the path breaks and why.
struct PathCheck {
    bool feasible = false;

    ProtocolStack final_stack;
    Cost cost = 0;
    std::size_t max_height = 0;
    std::vector<ProtocolStack> stacks;  // stack after each function

    std::size_t failure_index = 0;  // step index; == hops() for a terminal failure
    std::string reason;
};

/// Validates edges, function membership, step-by-step stack rewrites, and
/// the terminal condition (single protocol receivable by the last node).
/// Throws std::invalid_argument on structurally malformed paths.
PathCheck feasible_check(const Network& net, const FeasiblePath& path);

struct OracleBudgetError : std::runtime_error {
    explicit OracleBudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest feasible routes for every (node, stack, destination) with
/// stack heights capped at h_max, computed by label-setting backward
/// search per destination over the (node, stack) state space.
///
/// Distances follow path semantics: the states (D, [x]) with x in In(D)
/// are accepting and have distance 0. The engine never stores those as
/// rows (delivery is local), so `engine_rows` exposes the comparable view
/// where accepting keys are replaced by their best >= 1-hop route, when
/// one exists.
class AllPairs {
  public:
    struct Info {
        Cost cost = 0;
        std::size_t hops = 0;  // of the min-cost, then min-hop route
        AdaptationFunction via_function;
        NodeId via_next;
        bool accepting = false;
    };
    using StateKey = std::pair<NodeId, ProtocolStack>;
    using StateMap = std::map<StateKey, Info>;

    std::optional<Cost> distance(const NodeId& from, const ProtocolStack& stack,
                                 const NodeId& dest) const;
    const Info* find(const NodeId& from, const ProtocolStack& stack, const NodeId& dest) const;
    const StateMap& states(const NodeId& dest) const;

    /// Row-equivalent reachability info: like find(), but accepting keys
    /// resolve to their loop route (or nullptr when none exists).
    const Info* row_info(const NodeId& from, const ProtocolStack& stack,
                         const NodeId& dest) const;
    StateMap engine_rows(const NodeId& dest) const;

    /// Reconstructs the route the engine would use from (from, stack).
    /// Throws std::invalid_argument when unreachable.
    FeasiblePath witness(const NodeId& from, const ProtocolStack& stack,
                         const NodeId& dest) const;

    std::vector<NodeId> destinations() const;
    std::size_t h_max() const { return h_max_; }
    std::uint64_t settled_states() const { return settled_; }

  private:
    friend AllPairs all_pairs(const Network&, std::size_t, std::uint64_t);
    friend AllPairs all_pairs_single(const Network&, std::size_t, const NodeId&, std::uint64_t);

    std::size_t h_max_ = 0;
    std::map<NodeId, StateMap> reach_;           // per destination, accepting at 0
    std::map<NodeId, StateMap> accepting_rows_;  // loop routes for accepting keys
    std::uint64_t settled_ = 0;
};

inline constexpr std::uint64_t kDefaultOracleBudget = 10'000'000;

/// All destinations. Throws OracleBudgetError when the number of settled
/// states exceeds the budget (pathologically entangled function sets).
AllPairs all_pairs(const Network& net, std::size_t h_max,
                   std::uint64_t state_budget = kDefaultOracleBudget);

/// Single-destination variant; the result answers queries for `dest` only.
AllPairs all_pairs_single(const Network& net, std::size_t h_max, const NodeId& dest,
                          std::uint64_t state_budget = kDefaultOracleBudget);

struct BruteForceResult {
    std::optional<Cost> cost;
    std::optional<FeasiblePath> path;
};

/// Exhaustive enumeration of function-labelled walks of at most max_hops
/// hops from (source, [init]), unbounded stack height, as an independent
/// reference. Ties: fewer hops, then lexicographic node sequence, then
/// function sequence. Walks that provably cannot reach dest in the
/// remaining hops (plain-graph distance) are skipped; a per-call expansion
/// budget turns pathological blowups into OracleBudgetError rather than a
/// silent truncation.
BruteForceResult brute_force(const Network& net, const NodeId& source, const NodeId& dest,
                             ProtocolId init, std::size_t max_hops,
                             std::uint64_t budget = kDefaultOracleBudget);

/// Hop count of the longest shortest feasible route over all ordered node
/// pairs (S != D) and all initial protocols, min-cost then min-hops per
/// pair. nullopt when no feasible route exists at all.
std::optional<std::size_t> diameter(const AllPairs& ap);
std::optional<std::size_t> diameter(const Network& net, std::size_t h_max);

/// "S (a->a) U1 (a->ab) U2 ~(a->ab) D" rendering and its inverse. The
/// initial stack is implied by the first function and must be a single
/// protocol (conversion or encapsulation first).
std::string to_string(const FeasiblePath& path, const Network& net);
FeasiblePath parse_path(std::string_view text, const Network& net);

}  // namespace stackroute
