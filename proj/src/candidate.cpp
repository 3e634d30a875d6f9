#include "loosepack/candidate.hpp"

#include <algorithm>
#include <string>

#include "loosepack/binomial.hpp"

namespace loosepack {
namespace {

void require_sorted_unique(const std::vector<Vertex>& v, std::uint64_t n, const char* what) {
    if (!std::is_sorted(v.begin(), v.end()) || std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw Error(std::string(what) + " must be sorted without repeats");
    }
    if (!v.empty() && v.back() >= n) throw Error(std::string(what) + " has a label outside [0,n)");
}

bool in_sorted(const std::vector<Vertex>& v, Vertex x) { return std::binary_search(v.begin(), v.end(), x); }

KTuple make_tuple(std::span<const Vertex> v) { return KTuple(v); }

}  // namespace

std::uint64_t select_complement(std::span<const Vertex> excluded, std::uint64_t j) {
    // excluded[t] - t counts the allowed values below excluded[t]
    std::size_t lo = 0, hi = excluded.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (excluded[mid] - mid <= j) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return j + lo;
}

CandidateSet CandidateSet::all(std::uint64_t n, unsigned k) {
    require_rank_domain(n, k);
    if (k < 2 || k > n) throw Error("AllTuples needs 2 <= k <= n");
    return CandidateSet(n, k, All{});
}

CandidateSet CandidateSet::extend(std::uint64_t n, unsigned k, Vertex anchor, std::vector<Vertex> forbidden) {
    require_rank_domain(n, k);
    require_sorted_unique(forbidden, n, "forbidden set");
    if (anchor >= n) throw Error("anchor outside [0,n)");
    if (in_sorted(forbidden, anchor)) throw Error("anchor is in its own forbidden set");
    std::vector<Vertex> excluded = forbidden;
    excluded.insert(std::upper_bound(excluded.begin(), excluded.end(), anchor), anchor);
    return CandidateSet(n, k, Extend{anchor, std::move(forbidden), std::move(excluded)});
}

CandidateSet CandidateSet::closing(std::uint64_t n, unsigned k, std::vector<Vertex> free, Vertex a, Vertex b) {
    require_rank_domain(n, k);
    require_sorted_unique(free, n, "free vertex set");
    if (a >= n || b >= n) throw Error("closing endpoint outside [0,n)");
    if (a == b) throw Error("closing endpoints must differ");
    if (in_sorted(free, a) || in_sorted(free, b)) throw Error("closing endpoint lies in the free set");
    return CandidateSet(n, k, Closing{std::move(free), a, b});
}

std::string_view CandidateSet::kind() const noexcept {
    switch (v_.index()) {
        case 0: return "all";
        case 1: return "extend";
        default: return "closing";
    }
}

Rank CandidateSet::size() const {
    return std::visit(
        [&](const auto& v) -> Rank {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, All>) {
                return binomial_cached(n_, k_);
            } else if constexpr (std::is_same_v<T, Extend>) {
                return binomial_cached(n_ - 1 - v.forbidden.size(), k_ - 1);
            } else {
                const std::uint64_t f = v.free.size();
                return binomial_cached(f, k_) + 2 * binomial_cached(f, k_ - 1);
            }
        },
        v_);
}

bool CandidateSet::contains(const KTuple& e) const {
    if (e.size() != k_ || e.back() >= n_) return false;
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, All>) {
                return true;
            } else if constexpr (std::is_same_v<T, Extend>) {
                if (!e.contains(v.anchor)) return false;
                for (Vertex x : e.vertices()) {
                    if (in_sorted(v.forbidden, x)) return false;
                }
                return true;
            } else {
                unsigned inside = 0;
                Vertex outside = 0;
                for (Vertex x : e.vertices()) {
                    if (in_sorted(v.free, x)) {
                        ++inside;
                    } else {
                        outside = x;
                    }
                }
                if (inside == k_) return true;
                return inside + 1 == k_ && (outside == v.a || outside == v.b);
            }
        },
        v_);
}

KTuple CandidateSet::member(const Rank& index) const {
    if (index >= size()) throw RangeError("candidate index " + index.str() + " out of range");
    std::array<std::uint64_t, kMaxUniformity> pos{};
    std::array<Vertex, kMaxUniformity> out{};
    return std::visit(
        [&](const auto& v) -> KTuple {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, All>) {
                unrank_positions(index, k_, n_, std::span(pos.data(), k_));
                for (unsigned i = 0; i < k_; ++i) out[i] = static_cast<Vertex>(pos[i]);
                return make_tuple(std::span<const Vertex>(out.data(), k_));
            } else if constexpr (std::is_same_v<T, Extend>) {
                const auto& excluded = v.excluded;
                const std::uint64_t allowed = n_ - excluded.size();
                unrank_positions(index, k_ - 1, allowed, std::span(pos.data(), k_ - 1));
                for (unsigned i = 0; i + 1 < k_; ++i) {
                    out[i] = static_cast<Vertex>(select_complement(excluded, pos[i]));
                }
                out[k_ - 1] = v.anchor;
                return make_tuple(std::span<const Vertex>(out.data(), k_));
            } else {
                const std::uint64_t f = v.free.size();
                const Rank inner = binomial_cached(f, k_);
                const Rank side = binomial_cached(f, k_ - 1);
                if (index < inner) {
                    unrank_positions(index, k_, f, std::span(pos.data(), k_));
                    for (unsigned i = 0; i < k_; ++i) out[i] = v.free[pos[i]];
                    return make_tuple(std::span<const Vertex>(out.data(), k_));
                }
                Rank rest = index - inner;
                Vertex endpoint = v.a;
                if (rest >= side) {
                    rest -= side;
                    endpoint = v.b;
                }
                unrank_positions(rest, k_ - 1, f, std::span(pos.data(), k_ - 1));
                for (unsigned i = 0; i + 1 < k_; ++i) out[i] = v.free[pos[i]];
                out[k_ - 1] = endpoint;
                return make_tuple(std::span<const Vertex>(out.data(), k_));
            }
        },
        v_);
}

std::vector<KTuple> CandidateSet::members(std::uint64_t limit) const {
    const Rank total = size();
    if (total > limit) throw RangeError("candidate set of size " + total.str() + " exceeds enumeration limit");
    const auto count = total.convert_to<std::uint64_t>();
    std::vector<KTuple> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(member(Rank(i)));
    return out;
}

nlohmann::json to_json(const CandidateSet& c) {
    nlohmann::json j{{"type", c.kind()}, {"n", c.n()}, {"k", c.k()}};
    if (const auto* e = std::get_if<CandidateSet::Extend>(&c.variant())) {
        j["anchor"] = e->anchor;
        j["forbidden"] = e->forbidden;
    } else if (const auto* cl = std::get_if<CandidateSet::Closing>(&c.variant())) {
        j["free"] = cl->free;
        j["a"] = cl->a;
        j["b"] = cl->b;
    }
    return j;
}

CandidateSet candidate_from_json(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    const auto n = j.at("n").get<std::uint64_t>();
    const auto k = j.at("k").get<unsigned>();
    if (type == "all") return CandidateSet::all(n, k);
    if (type == "extend") {
        return CandidateSet::extend(n, k, j.at("anchor").get<Vertex>(), j.at("forbidden").get<std::vector<Vertex>>());
    }
    if (type == "closing") {
        return CandidateSet::closing(n, k, j.at("free").get<std::vector<Vertex>>(), j.at("a").get<Vertex>(),
                                     j.at("b").get<Vertex>());
    }
    throw Error("unknown candidate type '" + type + "'");
}

}  // namespace loosepack
