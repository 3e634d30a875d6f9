#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

#include "loosepack/loose.hpp"

namespace loosepack {

// Inheritance tags carried by an auxiliary edge.
inline constexpr std::uint8_t kTagA = 1;      // v0 can stand for endpoint a
inline constexpr std::uint8_t kTagB = 2;      // v0 can stand for endpoint b
inline constexpr std::uint8_t kTagPlain = 4;  // colored inside V

struct AuxEdge {
    KTuple edge;
    std::uint8_t tags = 0;
    friend bool operator==(const AuxEdge&, const AuxEdge&) = default;
};

/// Closing instance: a k-graph on V plus the dummy vertex v0.
struct AuxInstance {
    unsigned k = 3;
    Vertex v0 = 0;
    std::vector<Vertex> vertices;  // V and v0
    std::vector<AuxEdge> edges;
    std::uint64_t node_cap = 10'000'000;  // 0 means unlimited

    /// Throws Error on labels outside the vertex set, duplicate edges or a
    /// v0-edge carrying neither side tag.
    void validate() const;
    friend bool operator==(const AuxInstance&, const AuxInstance&) = default;
};

enum class SolverOutcome { Found, NoCycle, CapExceeded };
std::string_view to_string(SolverOutcome o) noexcept;

struct SolverResult {
    SolverOutcome outcome = SolverOutcome::NoCycle;
    /// On Found: order starts at v0; the first edge inherits a, the last
    /// edge (wrapping back to v0) inherits b.
    LooseCycle cycle;
    KTuple a_edge;
    KTuple b_edge;
    std::uint64_t nodes = 0;
    bool found() const noexcept { return outcome == SolverOutcome::Found; }
};

/// Randomized DFS from v0 over an a-side edge, closing with a b-side edge.
/// Candidate edges and link choices are tried in rng-shuffled order.
SolverResult find_constrained_hc(const AuxInstance& inst, std::mt19937_64& rng);

struct BruteForceResult {
    SolverResult result;
    std::uint64_t count = 0;  // distinct feasible cycles
};

/// Enumerates every cyclic order with v0 first; test oracle, |V|+1 <= 13.
BruteForceResult brute_force_hc(const AuxInstance& inst);

inline constexpr std::size_t kBruteForceLimit = 13;

nlohmann::json to_json(const AuxInstance& inst);
AuxInstance aux_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverResult& r);

}  // namespace loosepack
