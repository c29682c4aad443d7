#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "stackroute/protocol.hpp"

namespace stackroute {

/// 16-byte node identifier, ordered byte-lexicographically. Human-readable
/// aliases are zero-padded into the canonical form; aliases longer than
/// 16 bytes are rejected.
struct NodeId {
    std::array<std::uint8_t, 16> bytes{};

    auto operator<=>(const NodeId&) const = default;

    static NodeId from_alias(std::string_view alias);
    std::string alias() const;  // bytes up to the first NUL
};

/// Additive route metric. Non-negative, integral; sums are checked.
using Cost = std::uint64_t;

/// Throws std::overflow_error instead of wrapping.
Cost checked_cost_add(Cost a, Cost b);

/// A node and its capabilities: the adaptation functions it can perform
/// and the protocols it can receive as a destination.
struct NodeSpec {
    NodeId id;
    std::string alias;
    std::vector<AdaptationFunction> functions;  // sorted, unique
    std::optional<std::vector<ProtocolId>> in_override;  // sorted; nullopt = derive

    /// In(U): explicit override if present, otherwise every protocol some
    /// function of this node accepts on top of a stack.
    std::vector<ProtocolId> in_set() const;
    /// Out(U): every protocol some function of this node leaves on top.
    std::vector<ProtocolId> out_set() const;

    bool has_function(const AdaptationFunction& f) const;
    void add_function(const AdaptationFunction& f);
};

struct ValidationIssue {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool empty() const { return issues.empty(); }
    /// True when there are no errors (warnings permitted).
    bool ok() const;
    std::size_t error_count() const;
    std::string to_string() const;
};

/// The network model: symmetric directed topology, per-node function sets,
/// and a cost per (node, function, neighbor) triple with a global default.
/// Immutable by convention once loaded or generated.
class Network {
  public:
    ProtocolId add_protocol(std::string name);
    NodeSpec& add_node(std::string alias);
    /// Adds one directed edge. Throws on self-loops; duplicates are no-ops.
    void add_edge(const NodeId& from, const NodeId& to);
    /// Adds both directions.
    void add_link(const NodeId& a, const NodeId& b);
    void set_weight(const NodeId& from, const AdaptationFunction& f, const NodeId& to, Cost c);
    void set_default_cost(Cost c) { default_cost_ = c; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t protocol_count() const { return protocols_.count(); }
    const ProtocolNames& protocols() const { return protocols_; }
    Cost default_cost() const { return default_cost_; }

    const std::map<NodeId, NodeSpec>& nodes() const { return nodes_; }
    const NodeSpec& node(const NodeId& id) const;          // throws if absent
    const NodeSpec* find_node(const NodeId& id) const;
    const NodeSpec* find_node_by_alias(std::string_view alias) const;

    bool has_edge(const NodeId& from, const NodeId& to) const;
    const std::vector<NodeId>& neighbors(const NodeId& id) const;  // sorted
    const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const std::map<std::tuple<NodeId, AdaptationFunction, NodeId>, Cost>& weights() const {
        return weights_;
    }

    /// w(U, f, V): configured cost or the network default.
    /// Throws std::invalid_argument unless (U,V) is an edge and f in F(U).
    Cost weight(const NodeId& from, const AdaptationFunction& f, const NodeId& to) const;

    std::string node_name(const NodeId& id) const;

    bool operator==(const Network& other) const;

  private:
    ProtocolNames protocols_;
    Cost default_cost_ = 1;
    std::map<NodeId, NodeSpec> nodes_;
    std::map<NodeId, std::vector<NodeId>> adjacency_;
    std::set<std::pair<NodeId, NodeId>> edges_;
    std::map<std::tuple<NodeId, AdaptationFunction, NodeId>, Cost> weights_;
};

/// Model-constraint check: asymmetric edges, unknown protocols, dangling
/// weights, inconsistent In-set overrides. Does not mutate.
ValidationReport validate(const Network& net);

/// Random network: Barabasi-Albert preferential attachment (m_attach seed
/// nodes, each new node attaches to m_attach distinct nodes with probability
/// proportional to degree + 1), symmetrized into directed links, then each
/// of the 3*alpha^2 candidate functions offered to each node with
/// probability p. Deterministic for a fixed seed; raising p with the same
/// seed only adds functions.
Network generate_random(std::size_t n, std::size_t alpha, double p, std::size_t m_attach,
                        std::uint64_t seed);

/// Alias the generator gives the index-th node of an n-node network
/// ("n000", "n001", ...). Zero-padded, so NodeId order matches creation
/// order.
std::string generated_node_alias(std::size_t index, std::size_t n);

struct NetworkParseError : std::runtime_error {
    explicit NetworkParseError(const std::string& what) : std::runtime_error(what) {}
};

/// JSON network file format (see README). save produces a canonical,
/// byte-stable rendering; load validates and refuses asymmetric topologies.
Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);
Network network_from_json(std::string_view text, const std::string& context = "<string>");
std::string network_to_json(const Network& net);

}  // namespace stackroute
