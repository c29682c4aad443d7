#include "stackroute/network.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stackroute {

NodeId NodeId::from_alias(std::string_view alias) {
    if (alias.empty()) {
        throw std::invalid_argument("node alias must not be empty");
    }
    if (alias.size() > 16) {
        throw std::invalid_argument("node alias \"" + std::string(alias) +
                                    "\" exceeds 16 bytes");
    }
    NodeId id;
    std::copy(alias.begin(), alias.end(), id.bytes.begin());
    return id;
}

std::string NodeId::alias() const {
    std::string out;
    for (std::uint8_t b : bytes) {
        if (b == 0) {
            break;
        }
        out += static_cast<char>(b);
    }
    return out;
}

Cost checked_cost_add(Cost a, Cost b) {
    if (a > std::numeric_limits<Cost>::max() - b) {
        throw std::overflow_error("cost addition overflow");
    }
    return a + b;
}

namespace {

void insert_sorted(std::vector<ProtocolId>& v, ProtocolId p) {
    auto it = std::lower_bound(v.begin(), v.end(), p);
    if (it == v.end() || *it != p) {
        v.insert(it, p);
    }
}

}  // namespace

std::vector<ProtocolId> NodeSpec::in_set() const {
    if (in_override) {
        return *in_override;
    }
    std::vector<ProtocolId> in;
    for (const AdaptationFunction& f : functions) {
        switch (f.kind) {
            case FunctionKind::Conversion:
            case FunctionKind::Encapsulation:
                insert_sorted(in, f.x);
                break;
            case FunctionKind::Decapsulation:
                insert_sorted(in, f.y);
                break;
        }
    }
    return in;
}

std::vector<ProtocolId> NodeSpec::out_set() const {
    std::vector<ProtocolId> out;
    for (const AdaptationFunction& f : functions) {
        switch (f.kind) {
            case FunctionKind::Conversion:
            case FunctionKind::Encapsulation:
                insert_sorted(out, f.y);
                break;
            case FunctionKind::Decapsulation:
                insert_sorted(out, f.x);
                break;
        }
    }
    return out;
}

bool NodeSpec::has_function(const AdaptationFunction& f) const {
    return std::binary_search(functions.begin(), functions.end(), f);
}

void NodeSpec::add_function(const AdaptationFunction& f) {
    auto it = std::lower_bound(functions.begin(), functions.end(), f);
    if (it == functions.end() || *it != f) {
        functions.insert(it, f);
    }
}

bool ValidationReport::ok() const {
    return error_count() == 0;
}

std::size_t ValidationReport::error_count() const {
    std::size_t n = 0;
    for (const auto& i : issues) {
        if (i.severity == ValidationIssue::Severity::Error) {
            ++n;
        }
    }
    return n;
}

std::string ValidationReport::to_string() const {
    std::string out;
    for (const auto& i : issues) {
        out += i.severity == ValidationIssue::Severity::Error ? "error: " : "warning: ";
        out += i.message;
        out += '\n';
    }
    return out;
}

ProtocolId Network::add_protocol(std::string name) {
    if (protocols_.count() >= 256) {
        throw std::invalid_argument("protocol set exceeds 256 identifiers");
    }
    if (std::find(protocols_.names.begin(), protocols_.names.end(), name) !=
        protocols_.names.end()) {
        throw std::invalid_argument("duplicate protocol name \"" + name + "\"");
    }
    protocols_.names.push_back(std::move(name));
    return ProtocolId{static_cast<std::uint8_t>(protocols_.count() - 1)};
}

NodeSpec& Network::add_node(std::string alias) {
    NodeId id = NodeId::from_alias(alias);
    auto [it, inserted] = nodes_.try_emplace(id);
    if (!inserted) {
        throw std::invalid_argument("duplicate node \"" + alias + "\"");
    }
    it->second.id = id;
    it->second.alias = std::move(alias);
    adjacency_.try_emplace(id);
    return it->second;
}

void Network::add_edge(const NodeId& from, const NodeId& to) {
    if (from == to) {
        throw std::invalid_argument("self-loop on node \"" + node_name(from) + "\"");
    }
    if (!edges_.emplace(from, to).second) {
        return;
    }
    auto& adj = adjacency_[from];
    adj.insert(std::lower_bound(adj.begin(), adj.end(), to), to);
}

void Network::add_link(const NodeId& a, const NodeId& b) {
    add_edge(a, b);
    add_edge(b, a);
}

void Network::set_weight(const NodeId& from, const AdaptationFunction& f, const NodeId& to,
                         Cost c) {
    weights_[{from, f, to}] = c;
}

const NodeSpec& Network::node(const NodeId& id) const {
    const NodeSpec* spec = find_node(id);
    if (!spec) {
        throw std::invalid_argument("unknown node \"" + id.alias() + "\"");
    }
    return *spec;
}

const NodeSpec* Network::find_node(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const NodeSpec* Network::find_node_by_alias(std::string_view alias) const {
    if (alias.empty() || alias.size() > 16) {
        return nullptr;
    }
    return find_node(NodeId::from_alias(alias));
}

bool Network::has_edge(const NodeId& from, const NodeId& to) const {
    return edges_.contains({from, to});
}

const std::vector<NodeId>& Network::neighbors(const NodeId& id) const {
    static const std::vector<NodeId> kEmpty;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

Cost Network::weight(const NodeId& from, const AdaptationFunction& f, const NodeId& to) const {
    if (!has_edge(from, to)) {
        throw std::invalid_argument("weight query for non-edge (" + node_name(from) + ", " +
                                    node_name(to) + ")");
    }
    const NodeSpec& spec = node(from);
    if (!spec.has_function(f)) {
        throw std::invalid_argument("weight query for function " + to_string(f, protocols_) +
                                    " not available on node " + node_name(from));
    }
    auto it = weights_.find({from, f, to});
    return it == weights_.end() ? default_cost_ : it->second;
}

std::string Network::node_name(const NodeId& id) const {
    const NodeSpec* spec = find_node(id);
    return spec ? spec->alias : id.alias();
}

bool Network::operator==(const Network& other) const {
    if (protocols_.names != other.protocols_.names || default_cost_ != other.default_cost_ ||
        edges_ != other.edges_ || weights_ != other.weights_ ||
        nodes_.size() != other.nodes_.size()) {
        return false;
    }
    for (auto it = nodes_.begin(), jt = other.nodes_.begin(); it != nodes_.end(); ++it, ++jt) {
        const NodeSpec& a = it->second;
        const NodeSpec& b = jt->second;
        // Compare effective in-sets so that a saved derived set reloads equal.
        if (a.id != b.id || a.alias != b.alias || a.functions != b.functions ||
            a.in_set() != b.in_set()) {
            return false;
        }
    }
    return true;
}

ValidationReport validate(const Network& net) {
    ValidationReport report;
    auto error = [&](std::string msg) {
        report.issues.push_back({ValidationIssue::Severity::Error, std::move(msg)});
    };
    auto warning = [&](std::string msg) {
        report.issues.push_back({ValidationIssue::Severity::Warning, std::move(msg)});
    };

    const std::size_t alpha = net.protocol_count();
    auto known = [&](ProtocolId p) { return p.value < alpha; };

    for (const auto& [from, to] : net.edges()) {
        if (!net.has_edge(to, from)) {
            error("asymmetric edge: (" + net.node_name(from) + ", " + net.node_name(to) +
                  ") has no reverse");
        }
        if (!net.find_node(from) || !net.find_node(to)) {
            error("edge references unknown node (" + from.alias() + ", " + to.alias() + ")");
        }
    }

    for (const auto& [id, spec] : net.nodes()) {
        for (const AdaptationFunction& f : spec.functions) {
            if (!known(f.x) || !known(f.y)) {
                error("node " + spec.alias + ": function " +
                      to_string(f, net.protocols()) + " references unknown protocol");
            }
        }
        if (spec.in_override) {
            for (ProtocolId p : *spec.in_override) {
                if (!known(p)) {
                    error("node " + spec.alias + ": In-set references unknown protocol id " +
                          std::to_string(p.value));
                }
            }
            // An explicit empty In-set while the functions accept protocols
            // makes the node silently undeliverable; flag it.
            if (spec.in_override->empty()) {
                NodeSpec derived = spec;
                derived.in_override.reset();
                if (!derived.in_set().empty()) {
                    warning("node " + spec.alias +
                            ": explicit empty In-set although functions accept protocols");
                }
            }
        }
    }

    for (const auto& [key, cost] : net.weights()) {
        const auto& [from, f, to] = key;
        const NodeSpec* spec = net.find_node(from);
        if (!spec) {
            error("weight references unknown node \"" + from.alias() + "\"");
            continue;
        }
        if (!spec->has_function(f)) {
            error("weight on node " + spec->alias + " references function " +
                  to_string(f, net.protocols()) + " outside F(" + spec->alias + ")");
        }
        if (!net.has_edge(from, to)) {
            error("weight references non-edge (" + net.node_name(from) + ", " +
                  net.node_name(to) + ")");
        }
        (void)cost;
    }

    return report;
}

namespace {

// Deterministic helpers on top of mt19937_64; the std distributions are
// implementation-defined, so sampling is done explicitly.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % bound;
    }

    bool bernoulli(double p) {
        // 53-bit mantissa draw; monotone in p for a fixed stream position.
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return u < p;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace

std::string generated_node_alias(std::size_t index, std::size_t n) {
    std::size_t width = 3;
    for (std::size_t bound = 1000; bound < n; bound *= 10) {
        ++width;
    }
    std::string digits = std::to_string(index);
    return "n" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

Network generate_random(std::size_t n, std::size_t alpha, double p, std::size_t m_attach,
                        std::uint64_t seed) {
    if (m_attach < 1 || n <= m_attach) {
        throw std::invalid_argument("generate_random: need n > m_attach >= 1");
    }
    if (alpha < 2 || alpha > 256) {
        throw std::invalid_argument("generate_random: alpha must be in [2, 256]");
    }
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("generate_random: p must be in [0, 1]");
    }

    Network net;
    for (std::size_t i = 0; i < alpha; ++i) {
        if (i < 26) {
            net.add_protocol(std::string(1, static_cast<char>('a' + i)));
        } else {
            net.add_protocol("p" + std::to_string(i));
        }
    }

    std::vector<NodeId> ids;
    std::vector<NodeSpec*> specs;
    ids.reserve(n);
    specs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        NodeSpec& spec = net.add_node(generated_node_alias(i, n));
        ids.push_back(spec.id);
        specs.push_back(&spec);
    }

    Rng rng(seed);

    // Preferential attachment over (degree + 1) so the initial isolated
    // seed nodes can be chosen at all.
    std::vector<std::size_t> degree(n, 0);
    for (std::size_t v = m_attach; v < n; ++v) {
        std::vector<std::size_t> chosen;
        while (chosen.size() < m_attach) {
            std::uint64_t total = 0;
            for (std::size_t u = 0; u < v; ++u) {
                if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) {
                    total += degree[u] + 1;
                }
            }
            std::uint64_t r = rng.below(total);
            for (std::size_t u = 0; u < v; ++u) {
                if (std::find(chosen.begin(), chosen.end(), u) != chosen.end()) {
                    continue;
                }
                const std::uint64_t w = degree[u] + 1;
                if (r < w) {
                    chosen.push_back(u);
                    break;
                }
                r -= w;
            }
        }
        for (std::size_t u : chosen) {
            net.add_link(ids[v], ids[u]);
            ++degree[u];
            ++degree[v];
        }
    }

    // One Bernoulli draw per candidate function in canonical order,
    // regardless of outcome: function sets grow monotonically in p for a
    // fixed seed, and the topology above is independent of p.
    for (std::size_t i = 0; i < n; ++i) {
        NodeSpec& spec = *specs[i];
        for (int kind = 0; kind < 3; ++kind) {
            for (std::size_t x = 0; x < alpha; ++x) {
                for (std::size_t y = 0; y < alpha; ++y) {
                    const bool take = rng.bernoulli(p);
                    if (take) {
                        spec.add_function({static_cast<FunctionKind>(kind),
                                           ProtocolId{static_cast<std::uint8_t>(x)},
                                           ProtocolId{static_cast<std::uint8_t>(y)}});
                    }
                }
            }
        }
    }

    return net;
}

// ---------------------------------------------------------------------------
// JSON file format

namespace {

using nlohmann::json;

const char* kind_tag(FunctionKind k) {
    switch (k) {
        case FunctionKind::Conversion:
            return "conv";
        case FunctionKind::Encapsulation:
            return "enc";
        case FunctionKind::Decapsulation:
            return "dec";
    }
    return "?";
}

FunctionKind kind_from_tag(const std::string& tag, const std::string& where) {
    if (tag == "conv") {
        return FunctionKind::Conversion;
    }
    if (tag == "enc") {
        return FunctionKind::Encapsulation;
    }
    if (tag == "dec") {
        return FunctionKind::Decapsulation;
    }
    throw NetworkParseError(where + ": unknown function kind \"" + tag + "\"");
}

ProtocolId protocol_from_json(const json& j, const ProtocolNames& names,
                              const std::string& where) {
    if (!j.is_string()) {
        throw NetworkParseError(where + ": protocol must be a string");
    }
    const auto p = names.find(j.get<std::string>());
    if (!p) {
        throw NetworkParseError(where + ": unknown protocol \"" + j.get<std::string>() + "\"");
    }
    return *p;
}

AdaptationFunction function_from_json(const json& j, const ProtocolNames& names,
                                      const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("x") || !j.contains("y")) {
        throw NetworkParseError(where + ": function needs kind/x/y fields");
    }
    return {kind_from_tag(j.at("kind").get<std::string>(), where),
            protocol_from_json(j.at("x"), names, where + ".x"),
            protocol_from_json(j.at("y"), names, where + ".y")};
}

json function_to_json(const AdaptationFunction& f, const ProtocolNames& names) {
    return json{{"kind", kind_tag(f.kind)},
                {"x", names.name_of(f.x)},
                {"y", names.name_of(f.y)}};
}

}  // namespace

Network network_from_json(std::string_view text, const std::string& context) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw NetworkParseError(context + ": " + e.what());
    }

    Network net;
    try {
        if (!doc.is_object()) {
            throw NetworkParseError(context + ": top level must be an object");
        }
        for (const auto& p : doc.at("protocols")) {
            net.add_protocol(p.get<std::string>());
        }
        if (doc.contains("default_cost")) {
            net.set_default_cost(doc.at("default_cost").get<Cost>());
        }
        for (const auto& jn : doc.at("nodes")) {
            const std::string alias = jn.at("id").get<std::string>();
            const std::string where = context + ": node \"" + alias + "\"";
            NodeSpec& spec = net.add_node(alias);
            if (jn.contains("functions")) {
                for (const auto& jf : jn.at("functions")) {
                    spec.add_function(function_from_json(jf, net.protocols(), where));
                }
            }
            if (jn.contains("in")) {
                std::vector<ProtocolId> in;
                for (const auto& jp : jn.at("in")) {
                    insert_sorted(in, protocol_from_json(jp, net.protocols(), where + ".in"));
                }
                spec.in_override = std::move(in);
            }
        }
        for (const auto& jl : doc.at("links")) {
            if (!jl.is_array() || jl.size() != 2) {
                throw NetworkParseError(context + ": link must be a [from, to] pair");
            }
            const std::string from = jl.at(0).get<std::string>();
            const std::string to = jl.at(1).get<std::string>();
            const NodeSpec* a = net.find_node_by_alias(from);
            const NodeSpec* b = net.find_node_by_alias(to);
            if (!a || !b) {
                throw NetworkParseError(context + ": link references unknown node (" + from +
                                        ", " + to + ")");
            }
            net.add_edge(a->id, b->id);
        }
        if (doc.contains("weights")) {
            for (const auto& jw : doc.at("weights")) {
                const std::string where = context + ": weight entry";
                const NodeSpec* a = net.find_node_by_alias(jw.at("node").get<std::string>());
                const NodeSpec* b = net.find_node_by_alias(jw.at("to").get<std::string>());
                if (!a || !b) {
                    throw NetworkParseError(where + " references unknown node");
                }
                net.set_weight(a->id,
                               function_from_json(jw.at("function"), net.protocols(), where),
                               b->id, jw.at("cost").get<Cost>());
            }
        }
    } catch (const json::exception& e) {
        throw NetworkParseError(context + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw NetworkParseError(context + ": " + e.what());
    }

    // Hard model violations make the network unusable; refuse them here.
    const ValidationReport report = validate(net);
    if (!report.ok()) {
        throw NetworkParseError(context + ": invalid network\n" + report.to_string());
    }
    return net;
}

std::string network_to_json(const Network& net) {
    json doc;
    doc["protocols"] = json::array();
    for (const std::string& name : net.protocols().names) {
        doc["protocols"].push_back(name);
    }
    doc["default_cost"] = net.default_cost();
    doc["nodes"] = json::array();
    for (const auto& [id, spec] : net.nodes()) {
        json jn;
        jn["id"] = spec.alias;
        jn["in"] = json::array();
        for (ProtocolId p : spec.in_set()) {
            jn["in"].push_back(net.protocols().name_of(p));
        }
        jn["functions"] = json::array();
        for (const AdaptationFunction& f : spec.functions) {
            jn["functions"].push_back(function_to_json(f, net.protocols()));
        }
        doc["nodes"].push_back(std::move(jn));
    }
    doc["links"] = json::array();
    for (const auto& [from, to] : net.edges()) {
        doc["links"].push_back(json::array({net.node_name(from), net.node_name(to)}));
    }
    doc["weights"] = json::array();
    for (const auto& [key, cost] : net.weights()) {
        const auto& [from, f, to] = key;
        doc["weights"].push_back(json{{"node", net.node_name(from)},
                                      {"function", function_to_json(f, net.protocols())},
                                      {"to", net.node_name(to)},
                                      {"cost", cost}});
    }
    return doc.dump(2) + "\n";
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw NetworkParseError("cannot open network file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return network_from_json(buffer.str(), path.string());
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write network file " + path.string());
    }
    out << network_to_json(net);
}

}  // namespace stackroute
