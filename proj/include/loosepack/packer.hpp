#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "loosepack/engine.hpp"
#include "loosepack/loose.hpp"
#include "loosepack/params.hpp"
#include "loosepack/solver.hpp"

namespace loosepack {

enum class FailCause { NoColor, NoCycle, SolverCap };
std::string_view to_string(FailCause c) noexcept;

struct StepFailure {
    std::uint32_t step = 0;
    FailCause cause = FailCause::NoColor;
    friend bool operator==(const StepFailure&, const StepFailure&) = default;
};

struct SolverStats {
    std::uint32_t attempts = 0;   // closing repetitions used
    std::uint32_t cap_hits = 0;
    std::uint64_t nodes = 0;      // summed over attempts
    std::uint64_t aux_edges = 0;  // of the last attempt
    friend bool operator==(const SolverStats&, const SolverStats&) = default;
};

struct RoundOutcome {
    std::uint32_t round = 0;
    std::optional<LooseCycle> cycle;    // Success
    std::optional<StepFailure> failure;
    std::vector<std::uint32_t> T;       // repetitions per step, step 1 first
    LoosePath path;                     // the long path as far as it grew
    SolverStats solver;

    bool success() const noexcept { return cycle.has_value(); }
    friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

struct PackOptions {
    CouplingMode mode = CouplingMode::Lazy;
    std::uint64_t solver_cap = 10'000'000;
};

/// Steps 1..K of round i, then the closing step. Failures are data.
RoundOutcome run_round(std::uint32_t i, const Params& params, SprinkleEngine& engine,
                       const PackOptions& opts = {});

/// Closing step K+1 for a path with K edges. Returns the full cycle, or the
/// failure cause after close_cap attempts.
std::optional<LooseCycle> close_round(std::uint32_t i, const LoosePath& path, const Params& params,
                                      SprinkleEngine& engine, const PackOptions& opts, SolverStats& stats,
                                      FailCause& cause);

/// Builds the closing instance on V + {v0 = n} from one attempt's colored set.
AuxInstance build_aux(const std::vector<Vertex>& free, Vertex a, Vertex b, std::uint64_t n, unsigned k,
                      const std::vector<KTuple>& colored);

struct PackResult {
    std::vector<LooseCycle> cycles;
    std::vector<RoundOutcome> outcomes;
    SprinkleEngine engine;
};

/// Rounds 1..N on a single ledger.
PackResult pack(const Params& params, std::uint64_t seed, const PackOptions& opts = {});

struct SlicedPack {
    RegimeSplit split;
    std::vector<PackResult> slices;
    std::vector<LooseCycle> cycles;  // concatenation in slice order
};

/// General-p driver: M independent packings at p/M, outputs concatenated.
SlicedPack pack_slices(std::uint64_t n, unsigned k, double p, double epsilon, const Overrides& overrides,
                       bool desk_scale, std::uint64_t seed, const PackOptions& opts = {});

nlohmann::json to_json(const RoundOutcome& o);
void write_outcomes_jsonl(std::ostream& os, const std::vector<RoundOutcome>& outcomes);

}  // namespace loosepack
