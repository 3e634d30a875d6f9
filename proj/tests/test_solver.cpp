#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "loosepack/solver.hpp"
#include "oracles.hpp"

using namespace loosepack;

namespace {

using EdgeMap = std::map<std::vector<std::uint32_t>, int>;

EdgeMap edge_map(const AuxInstance& inst) {
    EdgeMap m;
    for (const auto& ae : inst.edges) {
        std::vector<std::uint32_t> e(ae.edge.begin(), ae.edge.end());
        m[e] = ae.tags;
    }
    return m;
}

// Random instance on L vertices; every k-set is present with probability
// `density`, v0-edges get a random nonempty subset of {a, b}.
AuxInstance random_instance(unsigned L, unsigned k, double density, std::mt19937_64& rng) {
    AuxInstance inst;
    inst.k = k;
    std::vector<Vertex> labels(40);
    for (Vertex i = 0; i < labels.size(); ++i) labels[i] = i;
    std::shuffle(labels.begin(), labels.end(), rng);
    inst.vertices.assign(labels.begin(), labels.begin() + L);
    inst.v0 = inst.vertices[0];
    std::sort(inst.vertices.begin(), inst.vertices.end());
    std::bernoulli_distribution keep(density);
    std::vector<bool> pick(L, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
        std::vector<Vertex> e;
        for (unsigned i = 0; i < L; ++i) {
            if (pick[i]) e.push_back(inst.vertices[i]);
        }
        if (!keep(rng)) continue;
        const KTuple t{std::span<const Vertex>(e)};
        std::uint8_t tags = kTagPlain;
        if (t.contains(inst.v0)) tags = static_cast<std::uint8_t>(1 + rng() % 3);
        inst.edges.push_back({t, tags});
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return inst;
}

AuxInstance complete_instance(unsigned L, unsigned k) {
    std::mt19937_64 rng(0);
    AuxInstance inst = random_instance(L, k, 1.0, rng);
    for (auto& ae : inst.edges) {
        if (ae.edge.contains(inst.v0)) ae.tags = kTagA | kTagB;
    }
    return inst;
}

void check_found_cycle(const AuxInstance& inst, const SolverResult& r) {
    REQUIRE(r.found());
    const auto& order = r.cycle.order;
    REQUIRE(order.size() == inst.vertices.size());
    CHECK(order.front() == inst.v0);
    std::vector<std::uint32_t> relabeled(order.size());
    std::vector<Vertex> sorted = inst.vertices;
    for (std::size_t i = 0; i < order.size(); ++i) {
        relabeled[i] = static_cast<std::uint32_t>(
            std::lower_bound(sorted.begin(), sorted.end(), order[i]) - sorted.begin());
    }
    CHECK(oracle::is_loose_cycle(relabeled, static_cast<unsigned>(order.size()), inst.k));
    const EdgeMap m = edge_map(inst);
    const auto edges = r.cycle.edges();
    for (std::size_t s = 0; s < edges.size(); ++s) {
        std::vector<std::uint32_t> e(edges[s].begin(), edges[s].end());
        REQUIRE(m.count(e));
        if (s == 0) CHECK((m.at(e) & kTagA));
        if (s + 1 == edges.size()) CHECK((m.at(e) & kTagB));
    }
    CHECK(edges.front() == r.a_edge);
    CHECK(edges.back() == r.b_edge);
}

}  // namespace

TEST_CASE("unique cycle example") {
    AuxInstance inst;
    inst.k = 3;
    inst.v0 = 0;
    inst.vertices = {0, 1, 2, 3, 4, 5};
    inst.edges = {{{0, 1, 2}, kTagA}, {{2, 3, 4}, kTagPlain}, {{0, 4, 5}, kTagB}};
    std::mt19937_64 rng(1);
    const auto r = find_constrained_hc(inst, rng);
    check_found_cycle(inst, r);
    CHECK(r.a_edge == KTuple{0, 1, 2});
    CHECK(r.b_edge == KTuple{0, 4, 5});
    CHECK(brute_force_hc(inst).count == 1);

    inst.edges[2].tags = kTagA;
    const auto none = find_constrained_hc(inst, rng);
    CHECK(none.outcome == SolverOutcome::NoCycle);
    CHECK(to_string(none.outcome) == "NO_CYCLE");
    CHECK(brute_force_hc(inst).count == 0);
}

TEST_CASE("degenerate and empty instances") {
    std::mt19937_64 rng(2);
    AuxInstance empty;
    empty.k = 3;
    empty.v0 = 9;
    empty.vertices = {1, 2, 3, 4, 5, 9};
    CHECK(find_constrained_hc(empty, rng).outcome == SolverOutcome::NoCycle);

    // two-edge auxiliary graph never closes
    AuxInstance two;
    two.k = 3;
    two.v0 = 0;
    two.vertices = {0, 1, 2, 3};
    two.edges = {{{0, 1, 2}, kTagA | kTagB}, {{0, 2, 3}, kTagA | kTagB}};
    CHECK(find_constrained_hc(two, rng).outcome == SolverOutcome::NoCycle);
}

TEST_CASE("validate rejects malformed instances") {
    AuxInstance inst;
    inst.k = 3;
    inst.v0 = 0;
    inst.vertices = {0, 1, 2, 3, 4, 5};
    inst.edges = {{{0, 1, 2}, kTagPlain}};
    CHECK_THROWS_AS(inst.validate(), Error);
    inst.edges = {{{1, 2, 3}, 0}};
    CHECK_THROWS_AS(inst.validate(), Error);
    inst.edges = {{{1, 2, 3}, kTagPlain}, {{1, 2, 3}, kTagPlain}};
    CHECK_THROWS_AS(inst.validate(), Error);
    inst.edges = {{{1, 2, 7}, kTagPlain}};
    CHECK_THROWS_AS(inst.validate(), Error);
}

TEST_CASE("complete instance count") {
    const AuxInstance inst = complete_instance(6, 3);
    CHECK(brute_force_hc(inst).count == 60);
    CHECK(oracle::aux_cycles(inst.vertices, inst.v0, 3, edge_map(inst)).size() == 60);
    CHECK(static_cast<double>(brute_force_hc(complete_instance(8, 3)).count) == oracle::complete_aux_count(8, 3));
    CHECK(static_cast<double>(brute_force_hc(complete_instance(9, 4)).count) == oracle::complete_aux_count(9, 4));
}

TEST_CASE("solver agrees with exhaustive search") {
    std::mt19937_64 rng(3);
    struct Shape {
        unsigned L, k;
        int count;
    };
    for (const Shape sh : {Shape{6, 3, 150}, Shape{8, 3, 80}, Shape{9, 4, 40}, Shape{10, 3, 10}}) {
        for (int it = 0; it < sh.count; ++it) {
            const double density = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
            const AuxInstance inst = random_instance(sh.L, sh.k, density, rng);
            const auto oracle_sets = oracle::aux_cycles(inst.vertices, inst.v0, sh.k, edge_map(inst));
            const auto brute = brute_force_hc(inst);
            CHECK(brute.count == oracle_sets.size());
            std::mt19937_64 srng(rng());
            const auto r = find_constrained_hc(inst, srng);
            REQUIRE(r.outcome != SolverOutcome::CapExceeded);
            CHECK(r.found() == !oracle_sets.empty());
            if (r.found()) {
                check_found_cycle(inst, r);
                std::set<std::vector<std::uint32_t>> es;
                for (const auto& e : r.cycle.edges()) es.insert({e.begin(), e.end()});
                CHECK(oracle_sets.count(es) == 1);
            }
        }
    }
}

TEST_CASE("relabeling preserves the outcome") {
    std::mt19937_64 rng(4);
    for (int it = 0; it < 60; ++it) {
        const AuxInstance inst = random_instance(8, 3, 0.4, rng);
        std::vector<Vertex> perm(64);
        for (Vertex i = 0; i < perm.size(); ++i) perm[i] = i + 100;
        std::shuffle(perm.begin(), perm.end(), rng);
        AuxInstance moved = inst;
        moved.v0 = perm[inst.v0];
        for (auto& v : moved.vertices) v = perm[v];
        std::sort(moved.vertices.begin(), moved.vertices.end());
        for (auto& ae : moved.edges) {
            std::vector<Vertex> e;
            for (auto v : ae.edge) e.push_back(perm[v]);
            std::sort(e.begin(), e.end());
            ae.edge = KTuple{std::span<const Vertex>(e)};
        }
        std::mt19937_64 r1(7), r2(7);
        CHECK(find_constrained_hc(inst, r1).found() == find_constrained_hc(moved, r2).found());
    }
}

TEST_CASE("deterministic for a fixed rng state") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 20; ++it) {
        const AuxInstance inst = random_instance(10, 3, 0.5, rng);
        std::mt19937_64 a(it), b(it);
        const auto ra = find_constrained_hc(inst, a);
        const auto rb = find_constrained_hc(inst, b);
        CHECK(ra.outcome == rb.outcome);
        CHECK(ra.cycle == rb.cycle);
        CHECK(ra.nodes == rb.nodes);
    }
}

TEST_CASE("node cap") {
    AuxInstance inst = complete_instance(10, 3);
    inst.node_cap = 1;
    std::mt19937_64 rng(6);
    const auto r = find_constrained_hc(inst, rng);
    CHECK(r.outcome == SolverOutcome::CapExceeded);
    CHECK(to_string(r.outcome) == "SOLVER_CAP");
    inst.node_cap = 0;
    check_found_cycle(inst, find_constrained_hc(inst, rng));
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(8);
    const AuxInstance inst = random_instance(8, 3, 0.5, rng);
    const auto back = aux_from_json(to_json(inst));
    CHECK(back.v0 == inst.v0);
    CHECK(back.vertices == inst.vertices);
    CHECK(back.edges.size() == inst.edges.size());
    CHECK(edge_map(back) == edge_map(inst));
    CHECK_THROWS(aux_from_json(nlohmann::json::parse(R"({"k":3,"v0":0,"vertices":[0,1,2],"edges":[{"edge":[0,1,2],"tags":["x"]}]})")));
}
