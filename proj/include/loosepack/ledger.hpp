#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "loosepack/candidate.hpp"
#include "loosepack/simd/kernels.hpp"

namespace loosepack {

struct StepKey {
    std::uint32_t round = 0;
    std::uint32_t step = 0;
    friend auto operator<=>(const StepKey&, const StepKey&) = default;
};

/// One coloring repetition: every member of `candidate` was colored
/// independently with probability `prob`; `hits` are the successes.
struct QueryRecord {
    std::uint32_t round = 0;
    std::uint32_t step = 0;
    std::uint32_t rep = 0;  // 1-based within (round, step)
    CandidateRef candidate;
    double prob = 0.0;
    std::vector<KTuple> hits;

    StepKey key() const noexcept { return {round, step}; }
    friend bool operator==(const QueryRecord& a, const QueryRecord& b);
};

/// Append-only log of every coloring query. The accumulated mass of any tuple
/// is a pure function of this log.
class QueryLedger {
public:
    static constexpr std::uint64_t kNoCap = std::numeric_limits<std::uint64_t>::max();

    /// Rejects records out of (round, step, rep) order, repetitions beyond
    /// `cap`, probabilities outside [0,1] and hits outside the candidate set.
    void append(QueryRecord rec, std::uint64_t cap = kNoCap);

    std::span<const QueryRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// T for (round, step): repetitions logged, 0 if the step never ran.
    std::uint32_t repetitions(std::uint32_t round, std::uint32_t step) const;

    /// Per-record survival factors (1 - p) and log(1 - p), index-aligned with
    /// records().
    std::span<const double> survival_factors() const noexcept { return factors_; }
    std::span<const double> log_survival_factors() const noexcept { return log_factors_; }
    double min_prob() const noexcept { return min_prob_; }

    /// Distinct tuples colored by any record, colex order.
    std::vector<KTuple> colored() const;

    nlohmann::json record_json(std::size_t index) const;
    void write_jsonl(std::ostream& os) const;
    static QueryLedger read_jsonl(std::istream& is);

    friend bool operator==(const QueryLedger& a, const QueryLedger& b) { return a.records_ == b.records_; }

private:
    std::vector<QueryRecord> records_;
    std::vector<double> factors_;
    std::vector<double> log_factors_;
    std::map<StepKey, std::uint32_t> reps_;
    double min_prob_ = 1.0;
};

/// Probabilities below this switch mass replay to log space.
inline constexpr double kLogSpaceThreshold = 1e-9;

/// Exact accumulated mass 1 - prod(1 - p) over the first `prefix` records
/// whose candidate set contains `e`. Non-decreasing in `prefix`.
double replay_mass(const QueryLedger& ledger, const KTuple& e,
                   std::size_t prefix = std::numeric_limits<std::size_t>::max(),
                   const simd::KernelTable& kernels = simd::kernels());

/// The linearized mass: sum of p over the same records.
double linear_mass(const QueryLedger& ledger, const KTuple& e);

/// Membership of `e` in each record's candidate set (1/0 per record).
std::vector<std::uint8_t> membership_mask(const QueryLedger& ledger, const KTuple& e, std::size_t prefix);

}  // namespace loosepack
