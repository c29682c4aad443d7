#include <doctest.h>

#include <map>
#include <set>

#include "stackroute/simulator.hpp"
#include "test_support.hpp"

using namespace stackroute;
using namespace stackroute::test;

TEST_CASE("the three-node line converges to the known tables") {
    const Network net = line3();
    const SimResult result = run_to_quiescence(net, EngineConfig::bounded(3), 100);

    const RoutingTable& s = result.tables.at(N("S"));
    const RoutingRow* sd = s.lookup(N("D"), stack("a"));
    REQUIRE(sd != nullptr);
    CHECK(sd->cost == 2);
    CHECK(sd->next_hop == N("M"));
    CHECK(sd->function == conv('a', 'a'));

    const RoutingTable& m = result.tables.at(N("M"));
    CHECK(m.size() == 1);
    const RoutingRow* md = m.lookup(N("D"), stack("a"));
    REQUIRE(md != nullptr);
    CHECK(md->cost == 1);
    CHECK(md->next_hop == N("D"));
    CHECK(md->function == conv('a', 'b'));

    CHECK(result.tables.at(N("D")).empty());
    CHECK(result.metrics.rounds_to_quiescence <= 4);
    CHECK(result.metrics.max_message_stack_height <= 3);
}

TEST_CASE("table dumps are deterministic and byte-identical") {
    const Network net = line3();
    const SimResult a = run_to_quiescence(net, EngineConfig::bounded(3), 100);
    const SimResult b = run_to_quiescence(net, EngineConfig::bounded(3), 100);
    CHECK(a.metrics.total_messages == b.metrics.total_messages);
    CHECK(dump_tables_csv(net, a.tables) == dump_tables_csv(net, b.tables));

    CHECK(dump_tables_csv(net, a.tables) ==
          "node,dest,stack,cost,next_hop,function\n"
          "M,D,a,1,D,\"a->b\"\n"
          "S,D,a,2,M,\"a->a\"\n"
          "S,M,a,1,M,\"a->a\"\n");
}

TEST_CASE("a functionless network is quiescent immediately") {
    const Network net = generate_random(10, 2, 0.0, 3, 5);
    const SimResult result = run_to_quiescence(net, EngineConfig::bounded(3), 100);
    CHECK(result.metrics.rounds_to_quiescence == 0);
    CHECK(result.metrics.total_messages == 0);
    for (const auto& [id, table] : result.tables) {
        CHECK(table.empty());
    }
}

TEST_CASE("step_round is a no-op once quiescent") {
    const Network net = line3();
    Simulation sim(net, EngineConfig::bounded(3));
    while (!sim.quiescent()) {
        sim.step_round();
    }
    const std::size_t round = sim.round();
    sim.step_round();
    CHECK(sim.round() == round);
}

TEST_CASE("round one delivers the init advertisements") {
    const Network net = line3();
    Simulation sim(net, EngineConfig::bounded(3));
    CHECK(sim.table(N("M")).empty());
    sim.step_round();
    // M heard (D, b, 0) and installed its first row
    const RoutingRow* row = sim.table(N("M")).lookup(N("D"), stack("a"));
    REQUIRE(row != nullptr);
    CHECK(row->cost == 1);
}

TEST_CASE("table costs never increase across rounds") {
    const Network net = generate_random(12, 2, 0.3, 3, 11);
    Simulation sim(net, EngineConfig::bounded(3));

    std::map<NodeId, std::map<RoutingTable::Key, Cost>> seen;
    while (!sim.quiescent()) {
        sim.step_round();
        for (const auto& [id, table] : sim.tables()) {
            for (const auto& [key, row] : table) {
                auto [it, inserted] = seen[id].try_emplace(key, row.cost);
                if (!inserted) {
                    CHECK(row.cost <= it->second);
                    it->second = row.cost;
                }
            }
        }
    }
}

TEST_CASE("every message sent in round t is delivered exactly once in round t+1") {
    const Network net = generate_random(8, 2, 0.3, 3, 17);
    using Key = std::tuple<std::size_t, NodeId, NodeId, NodeId, ProtocolStack, Cost>;
    std::multiset<Key> sends;
    std::multiset<Key> recvs;
    Simulation sim(net, EngineConfig::bounded(3), [&](const TraceEvent& e) {
        if (e.kind == TraceEvent::Kind::Send) {
            sends.emplace(e.round + 1, e.node, e.peer, e.dest, e.stack, e.cost);
        } else if (e.kind == TraceEvent::Kind::Recv) {
            recvs.emplace(e.round, e.peer, e.node, e.dest, e.stack, e.cost);
        }
    });
    while (!sim.quiescent()) {
        sim.step_round();
    }
    CHECK(sends == recvs);
    CHECK(sends.size() == sim.metrics().total_messages);
}

TEST_CASE("quiescent tables are a fixpoint of their own inbox history") {
    const Network net = generate_random(10, 2, 0.3, 3, 21);

    struct Seen {
        NodeId to;
        NodeId from;
        ControlMessage msg;
    };
    std::vector<Seen> history;
    Simulation sim(net, EngineConfig::bounded(3), [&](const TraceEvent& e) {
        if (e.kind == TraceEvent::Kind::Recv) {
            history.push_back({e.node, e.peer, {e.dest, e.stack, e.cost}});
        }
    });
    while (!sim.quiescent()) {
        sim.step_round();
    }

    std::map<NodeId, NodeState> replay;
    for (const auto& [id, spec] : net.nodes()) {
        NodeState state = NodeState::from(net, id);
        state.table = sim.table(id);
        replay.emplace(id, std::move(state));
    }
    for (const Seen& seen : history) {
        const auto emissions =
            handle_message(replay.at(seen.to), seen.msg, seen.from, net,
                           EngineConfig::bounded(3));
        CHECK(emissions.empty());
    }
}

TEST_CASE("non-convergence within max_rounds carries partial state") {
    const Network net = line3();
    try {
        run_to_quiescence(net, EngineConfig::bounded(3), 1);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        // round 1 ran, so M already holds its first row
        CHECK(e.partial.tables.at(N("M")).lookup(N("D"), stack("a")) != nullptr);
        CHECK(e.partial.metrics.rounds_to_quiescence == 1);
    }
}

TEST_CASE("every emitted message respects the height cap") {
    const Network net = generate_random(10, 2, 0.4, 3, 31);
    for (std::size_t h_max : {1u, 2u, 4u}) {
        std::size_t worst = 0;
        Simulation sim(net, EngineConfig::bounded(h_max), [&](const TraceEvent& e) {
            if (e.kind == TraceEvent::Kind::Send) {
                worst = std::max(worst, e.stack.height());
            }
        });
        while (!sim.quiescent()) {
            sim.step_round();
        }
        CHECK(worst <= h_max);
        CHECK(sim.metrics().max_message_stack_height <= h_max);
    }
}

TEST_CASE("theoretical mode bounds messages by alpha n^2 on the wire") {
    const Network net = line3();  // alpha 2, n 3 -> cap 18
    std::size_t worst_wire_size = 0;
    Simulation sim(net, EngineConfig::theoretical(), [&](const TraceEvent& e) {
        if (e.kind == TraceEvent::Kind::Send) {
            worst_wire_size =
                std::max(worst_wire_size, encoded_size(ControlMessage{e.dest, e.stack, e.cost}));
        }
    });
    while (!sim.quiescent()) {
        sim.step_round();
    }
    CHECK(worst_wire_size <= 25 + 18);
}

TEST_CASE("trace lines render round, kind, and endpoints") {
    const Network net = line3();
    std::vector<std::string> lines;
    Simulation sim(net, EngineConfig::bounded(3), [&](const TraceEvent& e) {
        lines.push_back(format_trace_line(e, net));
    });
    sim.step_round();
    // D's init advertisement to M, sent in round 0
    CHECK(lines.front() == "0\tSEND\tD\tM\tD\tb\t0");
    bool recv_seen = false;
    for (const auto& line : lines) {
        if (line == "1\tRECV\tM\tD\tD\tb\t0") {
            recv_seen = true;
        }
    }
    CHECK(recv_seen);
}

TEST_CASE("convergence bound check instantiates the round bound") {
    const Network net = line3();
    const SimResult result = run_to_quiescence(net, EngineConfig::bounded(3), 100);
    const BoundCheck check = convergence_bound_check(result.metrics, net,
                                                     EngineConfig::bounded(3), 2);
    CHECK(check.bound == 18);  // (min(3, 18) + 1) * (2 + 2) + 2
    CHECK(check.ok);
}

TEST_CASE("table row counts stay within the h_max bound") {
    const Network net = generate_random(8, 2, 0.5, 3, 41);
    const std::size_t h_max = 3;
    const SimResult result = run_to_quiescence(net, EngineConfig::bounded(h_max), 10000);
    // n * (alpha^(h_max+1) - alpha) / (alpha - 1) rows at most
    const std::size_t stacks = (1u << (h_max + 1)) - 2;  // alpha = 2
    for (const auto& [id, table] : result.tables) {
        CHECK(table.size() <= net.node_count() * stacks);
    }
}
