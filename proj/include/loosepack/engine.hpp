#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "loosepack/candidate.hpp"
#include "loosepack/ledger.hpp"
#include "loosepack/simd/kernels.hpp"

namespace loosepack {

using Rng = std::mt19937_64;

/// Independent sub-streams of one master seed.
enum class Stream : std::uint32_t { Coloring = 1, Coupling = 2, Choice = 3, Solver = 4, Sample = 5 };

std::uint64_t derive_seed(std::uint64_t master, std::uint32_t round, std::uint32_t step, std::uint32_t rep,
                          Stream stream);

/// Uniform integer in [0, bound] for arbitrary-width bounds.
Rank uniform_rank(Rng& rng, const Rank& bound);

/// Colors each member of `c` independently with probability `prob`: draws
/// the success count from Binomial(|c|, prob), then that many distinct
/// members uniformly by unranking. Returns members in parameterization order.
std::vector<KTuple> sample_colored(const CandidateSet& c, double prob, Rng& rng);

enum class CouplingMode {
    Independent,  // plain sample_colored, no coupling state
    Lazy,         // successes drawn by count + unrank; U_e fixed at first success
    Eager,        // every member resolved against U_e = hash(seed, rank); small sets only
};

/// Per-tuple uniforms U_e behind the coupling to the binomial hypergraph.
/// In Eager mode U_e is the seeded hash of e's colex rank and S_e is tracked
/// for every member touched. In Lazy mode U_e is placed at e's first success
/// as S_before + V_e (S_after - S_before), V_e being the same seeded hash.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t master_seed);

    simd::MixKey key() const noexcept { return key_; }
    /// Seeded hash of e's colex rank, in [0,1).
    double base_uniform(const KTuple& e) const;

    std::optional<double> uniform(const KTuple& e) const;
    void materialize(const KTuple& e, double u);
    const std::unordered_map<KTuple, double, KTupleHash>& materialized() const noexcept { return u_; }

    /// Incrementally maintained S_e (Eager mode only; 0 if never touched).
    double tracked_mass(const KTuple& e) const;
    double& tracked_mass_ref(const KTuple& e) { return s_[e]; }

private:
    simd::MixKey key_;
    std::unordered_map<KTuple, double, KTupleHash> u_;
    std::unordered_map<KTuple, double, KTupleHash> s_;
};

/// One coupled coloring query of `c` at `prob`, logged to `ledger` as
/// repetition `rep` of `key`. Marginally each member succeeds with
/// probability `prob` independently of the past; every success satisfies
/// U_e <= S_e after the query. Lazy mode resolves U_e from the ledger replay
/// (before/after this record) so that U_e <= Q_e holds in exact arithmetic
/// of the replay itself.
std::vector<KTuple> coupled_query(QueryLedger& ledger, UniformSource& source, StepKey key, std::uint32_t rep,
                                  CandidateRef c, double prob, std::uint64_t cap, Rng& rng, CouplingMode mode,
                                  const simd::KernelTable& kernels = simd::kernels());

struct TrialOutcome {
    std::uint32_t repetitions = 0;  // T; equals cap on failure
    std::vector<KTuple> colored;    // empty on step failure

    bool failed() const noexcept { return colored.empty(); }
};

/// Single-writer owner of a run's ledger and coupling state.
class SprinkleEngine {
public:
    explicit SprinkleEngine(std::uint64_t seed, CouplingMode mode = CouplingMode::Lazy);

    /// One logged coloring repetition `rep` of step `key`.
    std::vector<KTuple> query(StepKey key, std::uint32_t rep, CandidateRef c, double prob,
                              std::uint64_t cap = QueryLedger::kNoCap);

    /// Repeats the coloring up to `cap` times, stopping at the first nonempty
    /// result. Every repetition is logged.
    TrialOutcome run_trials(StepKey key, CandidateRef c, double prob, std::uint64_t cap);

    Rng rng_for(StepKey key, std::uint32_t rep, Stream stream) const {
        return Rng(derive_seed(seed_, key.round, key.step, rep, stream));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    CouplingMode mode() const noexcept { return mode_; }
    const QueryLedger& ledger() const noexcept { return ledger_; }
    const UniformSource& source() const noexcept { return source_; }

private:
    std::uint64_t seed_;
    CouplingMode mode_;
    QueryLedger ledger_;
    UniformSource source_;
};

/// True iff every tuple the ledger ever colored has U_e <= p. On failure the
/// first offending tuple (colex order) is written to `witness`.
bool final_embedding_check(const QueryLedger& ledger, const UniformSource& source, double p,
                           KTuple* witness = nullptr);

}  // namespace loosepack
