#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stackroute/network.hpp"
#include "test_support.hpp"

using namespace stackroute;
using namespace stackroute::test;

TEST_CASE("node ids are 16-byte, byte-ordered aliases") {
    CHECK(N("S") < N("U1"));
    CHECK(N("U1") < N("U2"));
    CHECK(N("n000") < N("n001"));
    CHECK(N("abc").alias() == "abc");
    CHECK_THROWS_AS(NodeId::from_alias("12345678901234567"), std::invalid_argument);
    CHECK_THROWS_AS(NodeId::from_alias(""), std::invalid_argument);
}

TEST_CASE("checked cost addition") {
    CHECK(checked_cost_add(2, 3) == 5);
    CHECK_THROWS_AS(checked_cost_add(std::numeric_limits<Cost>::max(), 1), std::overflow_error);
}

TEST_CASE("in and out sets derive from the function set") {
    NodeSpec spec;
    spec.add_function(conv('a', 'b'));
    CHECK(spec.in_set() == std::vector<ProtocolId>{P('a')});
    CHECK(spec.out_set() == std::vector<ProtocolId>{P('b')});

    spec.functions.clear();
    spec.add_function(enc('a', 'b'));
    CHECK(spec.in_set() == std::vector<ProtocolId>{P('a')});
    CHECK(spec.out_set() == std::vector<ProtocolId>{P('b')});

    spec.functions.clear();
    spec.add_function(dec('a', 'b'));
    CHECK(spec.in_set() == std::vector<ProtocolId>{P('b')});
    CHECK(spec.out_set() == std::vector<ProtocolId>{P('a')});

    spec.in_override = std::vector<ProtocolId>{P('a'), P('b')};
    CHECK(spec.in_set() == std::vector<ProtocolId>{P('a'), P('b')});
}

TEST_CASE("validate accepts the fixtures") {
    CHECK(validate(line3()).empty());
    CHECK(validate(fig1()).empty());
}

TEST_CASE("validate flags asymmetric edges") {
    Network net;
    net.add_protocol("a");
    NodeSpec& u = net.add_node("U");
    NodeSpec& v = net.add_node("V");
    net.add_edge(u.id, v.id);  // no reverse
    const auto report = validate(net);
    CHECK(!report.ok());
    CHECK(report.error_count() == 1);
}

TEST_CASE("validate flags weights outside F(U)") {
    Network net = line3();
    net.set_weight(N("S"), enc('a', 'b'), N("M"), 4);  // S has no encapsulation
    const auto report = validate(net);
    CHECK(!report.ok());
}

TEST_CASE("validate flags unknown protocols") {
    Network net;
    net.add_protocol("a");
    NodeSpec& u = net.add_node("U");
    NodeSpec& v = net.add_node("V");
    net.add_link(u.id, v.id);
    u.add_function(conv('a', 'c'));  // c is not in the protocol set
    CHECK(!validate(net).ok());
}

TEST_CASE("validate warns on a self-defeating In override") {
    Network net;
    net.add_protocol("a");
    NodeSpec& u = net.add_node("U");
    u.add_function(conv('a', 'a'));  // accepts a, but the override hides that
    u.in_override = std::vector<ProtocolId>{};
    NodeSpec& v = net.add_node("V");
    net.add_link(u.id, v.id);

    const auto report = validate(net);
    CHECK(report.ok());  // warning, not an error
    CHECK(!report.empty());
}

TEST_CASE("self-loops are rejected outright") {
    Network net;
    net.add_protocol("a");
    NodeSpec& u = net.add_node("U");
    CHECK_THROWS_AS(net.add_edge(u.id, u.id), std::invalid_argument);
}

TEST_CASE("weight lookups honor overrides and preconditions") {
    Network net = line3();
    CHECK(net.weight(N("M"), conv('a', 'b'), N("D")) == 1);  // default
    net.set_weight(N("M"), conv('a', 'b'), N("D"), 5);
    CHECK(net.weight(N("M"), conv('a', 'b'), N("D")) == 5);

    CHECK_THROWS_AS(net.weight(N("S"), conv('a', 'a'), N("D")), std::invalid_argument);  // no edge
    CHECK_THROWS_AS(net.weight(N("S"), enc('a', 'b'), N("M")), std::invalid_argument);  // no f
}

TEST_CASE("generator produces the forced edge count") {
    const Network net = generate_random(50, 2, 0.1, 5, 7);
    CHECK(net.node_count() == 50);
    CHECK(net.edges().size() == 450);  // 45 added nodes x 5 links, both directions
    CHECK(validate(net).empty());
}

TEST_CASE("generator extremes: p = 0 and p = 1") {
    const Network empty = generate_random(12, 2, 0.0, 3, 1);
    for (const auto& [id, spec] : empty.nodes()) {
        CHECK(spec.functions.empty());
        CHECK(spec.in_set().empty());
    }

    const Network full = generate_random(12, 2, 1.0, 3, 1);
    for (const auto& [id, spec] : full.nodes()) {
        CHECK(spec.functions.size() == 12);  // 3 * alpha^2
        CHECK(spec.in_set() == std::vector<ProtocolId>{P('a'), P('b')});
    }
}

TEST_CASE("generator is deterministic and monotone in p") {
    const Network a = generate_random(20, 2, 0.2, 3, 42);
    const Network b = generate_random(20, 2, 0.2, 3, 42);
    CHECK(a == b);
    CHECK(network_to_json(a) == network_to_json(b));

    const Network c = generate_random(20, 2, 0.2, 3, 43);
    CHECK(!(a == c));

    // same seed, higher p: same topology, function supersets
    const Network d = generate_random(20, 2, 0.5, 3, 42);
    CHECK(a.edges() == d.edges());
    for (const auto& [id, spec] : a.nodes()) {
        for (const auto& f : spec.functions) {
            CHECK(d.node(id).has_function(f));
        }
    }
}

TEST_CASE("generator rejects bad parameters") {
    CHECK_THROWS_AS(generate_random(5, 2, 0.1, 5, 1), std::invalid_argument);   // n <= m
    CHECK_THROWS_AS(generate_random(5, 1, 0.1, 2, 1), std::invalid_argument);   // alpha < 2
    CHECK_THROWS_AS(generate_random(5, 300, 0.1, 2, 1), std::invalid_argument); // alpha > 256
    CHECK_THROWS_AS(generate_random(5, 2, 1.5, 2, 1), std::invalid_argument);   // p > 1
}

TEST_CASE("preferential attachment grows hubs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Network net = generate_random(200, 2, 0.0, 5, seed);
        std::map<NodeId, std::size_t> degree;
        for (const auto& [from, to] : net.edges()) {
            ++degree[from];
        }
        std::size_t max_degree = 0;
        for (const auto& [id, d] : degree) {
            max_degree = std::max(max_degree, d);
        }
        CHECK(max_degree > 15);  // 3 x m_attach
    }
}

TEST_CASE("network files load, save and round-trip") {
    const Network loaded = load_network(fixture_path("line3.json"));
    CHECK(loaded == line3());
    CHECK(validate(loaded).empty());

    const Network fig = load_network(fixture_path("fig1.json"));
    CHECK(fig == fig1());
    CHECK(fig.weight(N("U1"), enc('a', 'b'), N("U3")) == 3);
    CHECK(fig.weight(N("U3"), enc('b', 'a'), N("U1")) == 1);

    const auto tmp = std::filesystem::temp_directory_path() / "stackroute_net_roundtrip.json";
    save_network(fig, tmp);
    const Network reloaded = load_network(tmp);
    CHECK(reloaded == fig);

    // canonical form is stable
    CHECK(network_to_json(reloaded) == network_to_json(fig));
    std::filesystem::remove(tmp);
}

TEST_CASE("network files with defects are refused with context") {
    CHECK_THROWS_WITH_AS(
        (void)network_from_json(R"({"protocols":["a"],"nodes":[{"id":"U","functions":
            [{"kind":"conv","x":"a","y":"zz"}]}],"links":[]})",
                                "bad.json"),
        doctest::Contains("unknown protocol"), NetworkParseError);

    // asymmetric link set is a hard violation at load time
    CHECK_THROWS_AS((void)network_from_json(
                        R"({"protocols":["a"],"nodes":[{"id":"U"},{"id":"V"}],
                            "links":[["U","V"]]})",
                        "asym.json"),
                    NetworkParseError);

    CHECK_THROWS_AS((void)network_from_json("{ not json", "garbage.json"), NetworkParseError);

    CHECK_THROWS_AS((void)network_from_json(
                        R"({"protocols":["a"],"nodes":[{"id":"U"}],
                            "links":[["U","W"],["W","U"]]})",
                        "unknown-node.json"),
                    NetworkParseError);

    CHECK_THROWS_AS(load_network("/nonexistent/net.json"), NetworkParseError);
}
