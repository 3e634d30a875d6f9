#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "loosepack/engine.hpp"
#include "loosepack/loose.hpp"
#include "loosepack/packer.hpp"
#include "loosepack/params.hpp"

namespace loosepack {

struct PackingSection {
    std::size_t cycles = 0;
    std::size_t valid = 0;
    std::vector<std::pair<std::size_t, std::string>> invalid;  // index, defect detail
    std::vector<Collision> collisions;
    std::uint64_t collision_pairs = 0;  // sum over shared tuples of C(#cycles, 2)
};

PackingSection verify_packing(std::span<const LooseCycle> cycles, std::uint64_t n, unsigned k);

struct MassPlan {
    std::size_t sample_size = 256;
    std::uint64_t seed = 0;
    std::size_t spot_checks = 32;  // sampled tuples also replayed directly
};

struct MassSection {
    std::size_t colored = 0;
    std::size_t sampled = 0;
    double max_q = 0.0;
    std::optional<KTuple> argmax;
    std::vector<KTuple> violations;  // Q_e > p
    double mean_colored_q = 0.0;
    double mean_sampled_q = 0.0;
    double mean_sampled_linear = 0.0;
    double spot_check_max_diff = 0.0;  // closed form vs replay
    double window_low = 0.0;
    double window_high = 0.0;
    bool inside_window = false;  // diagnostic only at desk scale
};

MassSection verify_mass(const QueryLedger& ledger, const Params& params, const MassPlan& plan = {});

/// 2 exp(-2 lambda^2 / sum (b-a)^2). Throws on negative lambda or empty ranges.
double mcdiarmid_bound(double lambda, std::span<const std::pair<double, double>> ranges);

struct McdiarmidInstance {
    double lambda = 0.0;       // eps p / 3
    double range_width = 0.0;  // 2 omega^2 ln n / alpha^(k-1)
    double bound = 0.0;        // via mcdiarmid_bound with N equal ranges
    double exponent = 0.0;     // closed form -eps^2 p^2 alpha^(2k-2) / (18 N omega^4 ln^2 n)
};

McdiarmidInstance mcdiarmid_instance(const Params& params);

struct EmbeddingSection {
    bool ok = true;
    std::optional<KTuple> witness;
    double witness_u = 0.0;
};

EmbeddingSection verify_embedding(const QueryLedger& ledger, const UniformSource& source, double p);

/// Tuples in `tuples` appearing in Extend/Closing sets of two different
/// steps of the same round.
std::vector<KTuple> query_accounting_violations(const QueryLedger& ledger, std::span<const KTuple> tuples);

struct VerificationReport {
    PackingSection packing;
    MassSection mass;
    EmbeddingSection embedding;
    std::size_t accounting_violations = 0;
    AuditReport audit;
    McdiarmidInstance mcdiarmid;
};

VerificationReport verify_run(const PackResult& run, const Params& params, const MassPlan& plan = {});

nlohmann::json to_json(const PackingSection& s);
nlohmann::json to_json(const MassSection& s);
nlohmann::json to_json(const EmbeddingSection& s);
nlohmann::json to_json(const McdiarmidInstance& m);
nlohmann::json to_json(const VerificationReport& r);

}  // namespace loosepack
