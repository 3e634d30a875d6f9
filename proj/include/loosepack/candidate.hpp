#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "loosepack/ktuple.hpp"

namespace loosepack {

/// Symbolic query domain. Members are never materialized; each variant has a
/// closed-form size and an O(k log n) index -> member map.
class CandidateSet {
public:
    struct All {
        friend bool operator==(const All&, const All&) = default;
    };
    /// Tuples containing `anchor` whose other k-1 vertices avoid `forbidden`.
    struct Extend {
        Vertex anchor = 0;
        std::vector<Vertex> forbidden;  // sorted, excludes anchor
        std::vector<Vertex> excluded;   // forbidden plus anchor
        friend bool operator==(const Extend&, const Extend&) = default;
    };
    /// Tuples with all k vertices in `free`, or k-1 in `free` plus one of the
    /// path endpoints a, b.
    struct Closing {
        std::vector<Vertex> free;  // sorted
        Vertex a = 0;
        Vertex b = 0;
        friend bool operator==(const Closing&, const Closing&) = default;
    };
    using Variant = std::variant<All, Extend, Closing>;

    static CandidateSet all(std::uint64_t n, unsigned k);
    static CandidateSet extend(std::uint64_t n, unsigned k, Vertex anchor, std::vector<Vertex> forbidden);
    static CandidateSet closing(std::uint64_t n, unsigned k, std::vector<Vertex> free, Vertex a, Vertex b);

    std::uint64_t n() const noexcept { return n_; }
    unsigned k() const noexcept { return k_; }
    const Variant& variant() const noexcept { return v_; }
    std::string_view kind() const noexcept;

    Rank size() const;
    bool contains(const KTuple& e) const;
    /// Member with parameterization index `index` in [0, size()).
    KTuple member(const Rank& index) const;
    /// All members in index order; throws RangeError if size() > limit.
    std::vector<KTuple> members(std::uint64_t limit = 1u << 22) const;

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

private:
    CandidateSet(std::uint64_t n, unsigned k, Variant v) : n_(n), k_(k), v_(std::move(v)) {}

    std::uint64_t n_ = 0;
    unsigned k_ = 0;
    Variant v_;
};

using CandidateRef = std::shared_ptr<const CandidateSet>;

/// j-th element (0-based) of [0, inf) minus the sorted list `excluded`.
std::uint64_t select_complement(std::span<const Vertex> excluded, std::uint64_t j);

nlohmann::json to_json(const CandidateSet& c);
CandidateSet candidate_from_json(const nlohmann::json& j);

}  // namespace loosepack
