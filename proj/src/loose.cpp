#include "loosepack/loose.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace loosepack {
namespace {

std::vector<KTuple> segment_edges(std::span<const Vertex> order, unsigned k, bool cyclic) {
    std::vector<KTuple> out;
    if (k < 2 || order.empty()) return out;
    const std::size_t step = k - 1;
    const std::size_t len = order.size();
    const std::size_t m = cyclic ? len / step : (len - 1) / step;
    out.reserve(m);
    std::array<Vertex, kMaxUniformity> buf{};
    for (std::size_t s = 0; s < m; ++s) {
        for (unsigned t = 0; t < k; ++t) buf[t] = order[(s * step + t) % len];
        out.emplace_back(std::span<const Vertex>(buf.data(), k));
    }
    return out;
}

std::size_t intersection_size(const KTuple& a, const KTuple& b) {
    std::size_t count = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

CycleValidation reject(CycleDefect d, std::string detail) { return {d, std::move(detail)}; }

void require_k(unsigned k) {
    if (k < 3 || k > kMaxUniformity) {
        throw std::invalid_argument("uniformity k=" + std::to_string(k) + " outside [3, 8]");
    }
}

// Shared size checks; returns the expected edge count or a rejection.
std::optional<CycleValidation> check_counts(std::uint64_t n, unsigned k, std::size_t edges) {
    if (n % (k - 1) != 0) {
        return reject(CycleDefect::Divisibility,
                      "k-1=" + std::to_string(k - 1) + " does not divide n=" + std::to_string(n));
    }
    const std::uint64_t m = n / (k - 1);
    if (m < 3) {
        return reject(CycleDefect::WrongEdgeCount, "degenerate cycle with " + std::to_string(m) + " edges");
    }
    if (edges != m) {
        return reject(CycleDefect::WrongEdgeCount,
                      "expected " + std::to_string(m) + " edges, got " + std::to_string(edges));
    }
    return std::nullopt;
}

CycleValidation check_links(std::span<const KTuple> edges) {
    const std::size_t m = edges.size();
    for (std::size_t s = 0; s < m; ++s) {
        const auto& a = edges[s];
        const auto& b = edges[(s + 1) % m];
        const std::size_t shared = intersection_size(a, b);
        if (shared != 1) {
            return reject(CycleDefect::BadLink, "edges " + std::to_string(s) + " and " +
                                                    std::to_string((s + 1) % m) + " share " +
                                                    std::to_string(shared) + " vertices");
        }
    }
    std::unordered_map<Vertex, std::vector<std::size_t>> where;
    for (std::size_t s = 0; s < m; ++s) {
        for (Vertex v : edges[s].vertices()) where[v].push_back(s);
    }
    for (const auto& [v, idx] : where) {
        const bool adjacent = idx.size() == 2 && (idx[1] - idx[0] == 1 || (idx[0] == 0 && idx[1] == m - 1));
        if (idx.size() > 2 || (idx.size() == 2 && !adjacent)) {
            return reject(CycleDefect::Overlap,
                          "vertex " + std::to_string(v) + " lies in non-consecutive edges");
        }
    }
    return {};
}

}  // namespace

std::string_view to_string(CycleDefect d) noexcept {
    switch (d) {
        case CycleDefect::WrongCover: return "WRONG_COVER";
        case CycleDefect::WrongEdgeCount: return "WRONG_EDGE_COUNT";
        case CycleDefect::BadLink: return "BAD_LINK";
        case CycleDefect::Overlap: return "OVERLAP";
        case CycleDefect::Divisibility: return "DIVISIBILITY";
    }
    return "?";
}

std::string_view to_string(PathDefect d) noexcept {
    switch (d) {
        case PathDefect::DuplicateVertex: return "DUPLICATE_VERTEX";
        case PathDefect::WrongLength: return "WRONG_LENGTH";
    }
    return "?";
}

std::vector<KTuple> LoosePath::edges() const { return segment_edges(order, k, false); }
std::vector<KTuple> LooseCycle::edges() const { return segment_edges(order, k, true); }

PathValidation validate_loose_path(const LoosePath& p) {
    require_k(p.k);
    const std::size_t len = p.order.size();
    if (len < p.k || (len - 1) % (p.k - 1) != 0) {
        return {PathDefect::WrongLength, std::to_string(len) + " vertices is not m(k-1)+1 with m >= 1"};
    }
    std::unordered_set<Vertex> seen;
    for (Vertex v : p.order) {
        if (!seen.insert(v).second) return {PathDefect::DuplicateVertex, "vertex " + std::to_string(v)};
    }
    return {};
}

CycleValidation validate_loose_cycle(const LooseCycle& c, std::uint64_t n) {
    require_k(c.k);
    const std::size_t len = c.order.size();
    const std::size_t edges = len % (c.k - 1) == 0 ? len / (c.k - 1) : 0;
    if (auto bad = check_counts(n, c.k, edges)) return *bad;
    std::vector<bool> seen(n, false);
    for (Vertex v : c.order) {
        if (v >= n) return reject(CycleDefect::WrongCover, "label " + std::to_string(v) + " outside [0,n)");
        if (seen[v]) return reject(CycleDefect::WrongCover, "vertex " + std::to_string(v) + " repeated");
        seen[v] = true;
    }
    const auto e = c.edges();
    return check_links(e);
}

CycleValidation validate_loose_cycle_edges(std::span<const KTuple> edges, std::uint64_t n, unsigned k) {
    require_k(k);
    for (const auto& e : edges) {
        if (e.size() != k) throw std::invalid_argument("edge " + e.to_string() + " is not a k-set");
    }
    if (auto bad = check_counts(n, k, edges.size())) return *bad;
    std::vector<bool> seen(n, false);
    std::uint64_t covered = 0;
    for (const auto& e : edges) {
        for (Vertex v : e.vertices()) {
            if (v >= n) return reject(CycleDefect::WrongCover, "label " + std::to_string(v) + " outside [0,n)");
            if (!seen[v]) {
                seen[v] = true;
                ++covered;
            }
        }
    }
    if (covered != n) {
        return reject(CycleDefect::WrongCover, "edges cover " + std::to_string(covered) + " of " +
                                                   std::to_string(n) + " vertices");
    }
    return check_links(edges);
}

CycleValidation validate_loose_cycle_on(const LooseCycle& c, std::span<const Vertex> vertex_set) {
    std::vector<Vertex> sorted(vertex_set.begin(), vertex_set.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("vertex set has repeated labels");
    }
    LooseCycle local{{}, c.k};
    local.order.reserve(c.order.size());
    for (Vertex v : c.order) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
        if (it == sorted.end() || *it != v) {
            return reject(CycleDefect::WrongCover, "label " + std::to_string(v) + " outside the vertex set");
        }
        local.order.push_back(static_cast<Vertex>(it - sorted.begin()));
    }
    return validate_loose_cycle(local, sorted.size());
}

LooseCycle canonical_form(const LooseCycle& c) {
    const std::size_t step = c.k - 1;
    const std::size_t len = c.order.size();
    if (len == 0 || len % step != 0) return c;

    auto normalize = [&](std::vector<Vertex> seq) {
        for (std::size_t s = 0; s < len; s += step) {
            std::sort(seq.begin() + s + 1, seq.begin() + s + step);
        }
        return seq;
    };
    std::vector<Vertex> reflected(len);
    for (std::size_t i = 0; i < len; ++i) reflected[i] = c.order[(len - i) % len];

    const std::vector<Vertex> bases[2] = {normalize(c.order), normalize(reflected)};
    std::vector<Vertex> best;
    std::vector<Vertex> candidate(len);
    for (const auto& base : bases) {
        for (std::size_t shift = 0; shift < len; shift += step) {
            std::rotate_copy(base.begin(), base.begin() + shift, base.end(), candidate.begin());
            if (best.empty() || candidate < best) best = candidate;
        }
    }
    return {std::move(best), c.k};
}

std::vector<Collision> collision_report(std::span<const LooseCycle> cycles) {
    std::unordered_map<KTuple, std::vector<std::size_t>, KTupleHash> users;
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        for (const auto& e : cycles[i].edges()) {
            auto& list = users[e];
            if (list.empty() || list.back() != i) list.push_back(i);
        }
    }
    std::vector<Collision> out;
    for (auto& [tuple, list] : users) {
        if (list.size() >= 2) out.push_back({tuple, std::move(list)});
    }
    std::sort(out.begin(), out.end(), [](const Collision& a, const Collision& b) {
        if (a.tuple.size() != b.tuple.size()) return a.tuple.size() < b.tuple.size();
        return colex_less(a.tuple, b.tuple);
    });
    return out;
}

void Hypergraph::normalize() {
    for (const auto& e : edges) {
        if (e.size() != k) throw Error("edge " + e.to_string() + " is not a k-set");
        if (e.back() >= n) throw Error("edge " + e.to_string() + " has a label outside [0,n)");
    }
    std::sort(edges.begin(), edges.end(), colex_less);
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw Error("hypergraph has a duplicate edge");
    }
}

nlohmann::json tuple_to_json(const KTuple& t) {
    return nlohmann::json(std::vector<Vertex>(t.begin(), t.end()));
}

KTuple tuple_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<Vertex>>();
    return KTuple(std::span<const Vertex>(v));
}

nlohmann::json cycle_to_json(const LooseCycle& c) { return nlohmann::json(c.order); }

LooseCycle cycle_from_json(const nlohmann::json& j, unsigned k) { return {j.get<std::vector<Vertex>>(), k}; }

nlohmann::json hypergraph_to_json(Hypergraph h) {
    h.normalize();
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : h.edges) edges.push_back(tuple_to_json(e));
    return {{"n", h.n}, {"k", h.k}, {"edges", std::move(edges)}};
}

Hypergraph hypergraph_from_json(const nlohmann::json& j) {
    Hypergraph h;
    h.n = j.at("n").get<std::uint64_t>();
    h.k = j.at("k").get<unsigned>();
    for (const auto& e : j.at("edges")) h.edges.push_back(tuple_from_json(e));
    h.normalize();
    return h;
}

}  // namespace loosepack
