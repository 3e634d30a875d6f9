#include "loosepack/ktuple.hpp"

#include <sstream>

#include "loosepack/binomial.hpp"

namespace loosepack {

KTuple::KTuple(std::initializer_list<Vertex> vertices)
    : KTuple(std::span<const Vertex>(vertices.begin(), vertices.size())) {}

KTuple::KTuple(std::span<const Vertex> vertices) {
    if (vertices.empty() || vertices.size() > kMaxUniformity) {
        throw RangeError("tuple size " + std::to_string(vertices.size()) + " outside [1, 8]");
    }
    std::copy(vertices.begin(), vertices.end(), v_.begin());
    size_ = static_cast<std::uint8_t>(vertices.size());
    std::sort(v_.begin(), v_.begin() + size_);
    if (std::adjacent_find(v_.begin(), v_.begin() + size_) != v_.begin() + size_) {
        throw Error("tuple has a repeated vertex: " + to_string());
    }
}

bool KTuple::contains(Vertex x) const noexcept { return std::binary_search(begin(), end(), x); }

KTuple KTuple::without(Vertex x) const {
    KTuple out;
    for (Vertex v : vertices()) {
        if (v != x) out.v_[out.size_++] = v;
    }
    if (out.size_ + 1 != size_) throw Error("vertex " + std::to_string(x) + " not in " + to_string());
    return out;
}

KTuple KTuple::with(Vertex x) const {
    if (size_ == kMaxUniformity) throw RangeError("tuple already has 8 vertices");
    if (contains(x)) throw Error("vertex " + std::to_string(x) + " already in " + to_string());
    KTuple out = *this;
    auto* pos = std::upper_bound(out.v_.begin(), out.v_.begin() + size_, x);
    std::copy_backward(pos, out.v_.begin() + size_, out.v_.begin() + size_ + 1);
    *pos = x;
    ++out.size_;
    return out;
}

std::string KTuple::to_string() const {
    std::ostringstream os;
    os << '{';
    for (unsigned i = 0; i < size_; ++i) os << (i ? "," : "") << v_[i];
    os << '}';
    return os.str();
}

std::size_t KTupleHash::operator()(const KTuple& t) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ t.size();
    for (Vertex v : t.vertices()) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

bool colex_less(const KTuple& a, const KTuple& b) noexcept {
    for (unsigned i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

Rank tuple_rank(const KTuple& e) {
    require_rank_domain(e.empty() ? 0 : e.back() + 1ULL, e.size());
    Rank r = 0;
    for (unsigned i = 0; i < e.size(); ++i) r += binomial_cached(e[i], i + 1);
    return r;
}

void unrank_positions(const Rank& rank, unsigned k, std::uint64_t size, std::span<std::uint64_t> out) {
    Rank rest = rank;
    std::uint64_t hi = size;  // exclusive upper bound for the next position
    for (unsigned i = k; i-- > 0;) {
        // largest c in [i, hi) with C(c, i+1) <= rest
        std::uint64_t lo = i, top = hi - 1;
        while (lo < top) {
            std::uint64_t mid = lo + (top - lo + 1) / 2;
            if (binomial_cached(mid, i + 1) <= rest) {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        out[i] = lo;
        rest -= binomial_cached(lo, i + 1);
        hi = lo;
    }
}

KTuple tuple_unrank(const Rank& rank, unsigned k, std::uint64_t n) {
    require_rank_domain(n, k);
    if (k == 0) throw RangeError("k must be positive");
    if (rank >= binomial_cached(n, k)) {
        throw RangeError("rank " + rank.str() + " out of range for C(" + std::to_string(n) + "," +
                         std::to_string(k) + ")");
    }
    std::array<std::uint64_t, kMaxUniformity> pos{};
    unrank_positions(rank, k, n, std::span(pos.data(), k));
    std::array<Vertex, kMaxUniformity> v{};
    for (unsigned i = 0; i < k; ++i) v[i] = static_cast<Vertex>(pos[i]);
    return KTuple(std::span<const Vertex>(v.data(), k));
}

}  // namespace loosepack
