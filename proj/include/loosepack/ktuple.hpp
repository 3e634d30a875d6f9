#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

#include "loosepack/types.hpp"

namespace loosepack {

/// A canonical k-subset of vertex labels: strictly increasing, 1 <= k <= 8.
class KTuple {
public:
    KTuple() = default;
    KTuple(std::initializer_list<Vertex> vertices);
    explicit KTuple(std::span<const Vertex> vertices);

    unsigned size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    Vertex operator[](std::size_t i) const noexcept { return v_[i]; }
    Vertex front() const noexcept { return v_[0]; }
    Vertex back() const noexcept { return v_[size_ - 1]; }
    std::span<const Vertex> vertices() const noexcept { return {v_.data(), size_}; }
    const Vertex* begin() const noexcept { return v_.data(); }
    const Vertex* end() const noexcept { return v_.data() + size_; }

    bool contains(Vertex x) const noexcept;
    /// Copy with `x` removed; requires contains(x).
    KTuple without(Vertex x) const;
    /// Copy with `x` added; requires !contains(x).
    KTuple with(Vertex x) const;

    friend bool operator==(const KTuple& a, const KTuple& b) noexcept {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }
    // Lexicographic; use colex_less for colex order.
    friend std::strong_ordering operator<=>(const KTuple& a, const KTuple& b) noexcept {
        return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
    }

    std::string to_string() const;

private:
    std::array<Vertex, kMaxUniformity> v_{};
    std::uint8_t size_ = 0;
};

struct KTupleHash {
    std::size_t operator()(const KTuple& t) const noexcept;
};

/// Colexicographic comparison of equal-size tuples.
bool colex_less(const KTuple& a, const KTuple& b) noexcept;

/// Colex rank: sum_i C(v_i, i+1) over the sorted labels.
Rank tuple_rank(const KTuple& e);

/// Inverse of tuple_rank within C([n], k). Throws RangeError if rank >= C(n,k)
/// or (n, k) is outside the rank domain.
KTuple tuple_unrank(const Rank& rank, unsigned k, std::uint64_t n);

/// Colex-unranks a k-subset of positions {0..size-1} into `out` (ascending).
/// The caller guarantees rank < C(size, k).
void unrank_positions(const Rank& rank, unsigned k, std::uint64_t size, std::span<std::uint64_t> out);

}  // namespace loosepack
