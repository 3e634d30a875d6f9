#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "loosepack/ktuple.hpp"

namespace loosepack {

enum class CycleDefect { WrongCover, WrongEdgeCount, BadLink, Overlap, Divisibility };
enum class PathDefect { DuplicateVertex, WrongLength };

std::string_view to_string(CycleDefect d) noexcept;
std::string_view to_string(PathDefect d) noexcept;

template <class Defect>
struct Validation {
    std::optional<Defect> defect;
    std::string detail;

    bool ok() const noexcept { return !defect.has_value(); }
    explicit operator bool() const noexcept { return ok(); }
};

using CycleValidation = Validation<CycleDefect>;
using PathValidation = Validation<PathDefect>;

/// Ordered vertex sequence of m(k-1)+1 labels; edge s covers positions
/// [s(k-1), (s+1)(k-1)].
struct LoosePath {
    std::vector<Vertex> order;
    unsigned k = 3;

    std::size_t edge_count() const noexcept { return order.size() < 2 ? 0 : (order.size() - 1) / (k - 1); }
    std::vector<KTuple> edges() const;

    friend bool operator==(const LoosePath&, const LoosePath&) = default;
};

/// Cyclic vertex sequence; edge s is the k consecutive positions starting at
/// s(k-1), wrapping around.
struct LooseCycle {
    std::vector<Vertex> order;
    unsigned k = 3;

    std::size_t edge_count() const noexcept { return order.size() / (k - 1); }
    std::vector<KTuple> edges() const;

    friend bool operator==(const LooseCycle&, const LooseCycle&) = default;
};

PathValidation validate_loose_path(const LoosePath& p);

/// Checks that `c` is a loose Hamilton cycle of the complete k-graph on [0, n).
/// Two-edge cycles are rejected as WrongEdgeCount: their two junctions make
/// "consecutive" ambiguous.
CycleValidation validate_loose_cycle(const LooseCycle& c, std::uint64_t n);

/// Same check for a cycle given as its edge list in cyclic order.
CycleValidation validate_loose_cycle_edges(std::span<const KTuple> edges, std::uint64_t n, unsigned k);

/// Checks that `c` is a loose Hamilton cycle spanning exactly `vertex_set`
/// (any labels, any order).
CycleValidation validate_loose_cycle_on(const LooseCycle& c, std::span<const Vertex> vertex_set);

/// Lexicographically least sequence among the rotations by multiples of k-1
/// and their reflections, after sorting each edge's interior vertices. Two
/// cycles have the same edge set iff their canonical forms agree.
LooseCycle canonical_form(const LooseCycle& c);

struct Collision {
    KTuple tuple;
    std::vector<std::size_t> cycles;  // ascending indices into the input list

    friend bool operator==(const Collision&, const Collision&) = default;
};

/// Every k-tuple used by two or more cycles, ordered by colex rank.
std::vector<Collision> collision_report(std::span<const LooseCycle> cycles);

struct Hypergraph {
    std::uint64_t n = 0;
    unsigned k = 3;
    std::vector<KTuple> edges;

    /// Sorts edges colex and rejects duplicates / out-of-range labels.
    void normalize();
};

nlohmann::json cycle_to_json(const LooseCycle& c);
LooseCycle cycle_from_json(const nlohmann::json& j, unsigned k);
nlohmann::json tuple_to_json(const KTuple& t);
KTuple tuple_from_json(const nlohmann::json& j);
nlohmann::json hypergraph_to_json(Hypergraph h);
Hypergraph hypergraph_from_json(const nlohmann::json& j);

}  // namespace loosepack
