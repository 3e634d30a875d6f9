#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "loosepack/types.hpp"

namespace loosepack {

/// Explicit replacements for derived constants. Desk-scale runs live here:
/// the asymptotic defaults are meaningless for simulable n.
struct Overrides {
    std::optional<double> omega_n;
    std::optional<double> q;
    std::optional<std::uint64_t> alpha_n;
    std::optional<std::vector<std::uint64_t>> A;  // one value for every j, or A_2..A_K
    std::optional<double> r;
    std::optional<std::uint64_t> N;
    std::optional<double> step1_prob;  // default n^-k
    std::optional<std::uint64_t> step1_cap;  // default ceil(omega_n)
    std::optional<std::uint64_t> close_cap;  // default ceil(omega_n)

    bool empty() const noexcept;
};

struct Params {
    std::uint64_t n = 0;
    unsigned k = 0;
    double p = 0.0;
    double epsilon = 0.0;

    double omega_n = 1.0;
    double q = 0.0;
    std::uint64_t alpha_n = 0;  // vertices left for closing
    std::uint64_t K = 0;        // path-growing steps
    std::vector<std::uint64_t> A;        // A[j-2] caps step j, 2 <= j <= K
    std::vector<double> A_formula;       // 2 ln n / (q C(n-(j-1)(k-1)-1, k-1)), pre-ceiling
    double r = 0.0;
    std::uint64_t N = 0;

    double step1_prob = 0.0;
    std::uint64_t step1_cap = 1;
    std::uint64_t close_cap = 1;

    bool desk_scale = false;
    Overrides overrides;

    /// Cap for step j in [2, K].
    std::uint64_t cap_for_step(std::uint64_t j) const { return A.at(j - 2); }
    /// Size of the step-j extension domain, C(n-(j-1)(k-1)-1, k-1).
    long double extension_domain(std::uint64_t j) const;
};

/// Derives every algorithm constant from (n, k, p, epsilon); overrides win.
/// Throws ParamError naming the offending field.
Params derive_params(std::uint64_t n, unsigned k, double p, double epsilon, const Overrides& overrides = {},
                     bool desk_scale = false);

struct AuditReport {
    double step_sum = 0.0;          // sum_j exp(-q A_j C_j) with the ceiled caps
    double step_sum_formula = 0.0;  // same with the pre-ceiling A_j
    double max_summand_formula_rel_err = 0.0;  // max_j |summand - n^-2| / n^-2
    double step_sum_bound = 0.0;    // (K-1)/n^2
    double half_over_n = 0.0;       // 1/(2n)
    double max_summand = 0.0;
    double step1_failure_bound = 0.0;  // exp(-n^-k C(n,k) omega_n)
    double close_failure_bound = 0.0;  // (1 - 1/(2k))^omega_n
    double round_failure_bound = 0.0;
    double p_prime = 0.0;           // from the run's probabilities and integer caps
    double p_prime_formula = 0.0;   // omega_n n^-k + max(q max A_j, r omega_n)
    double collision_estimate = 0.0;  // C(n,k) C(N,2) p'^2
    double expectation_low = 0.0;   // p(1 - 2 eps)
    double expectation_high = 0.0;  // p(1 - eps/2)
    double mcdiarmid_exponent = 0.0;  // -eps^2 p^2 alpha^(2k-2) / (18 N omega^4 ln^2 n)
    double regime_window = 0.0;    // (ln n)^(2k+2) / n^(k-1)
    bool in_regime_window = false;
    bool identity_holds = false;    // n - K(k-1) - 1 == alpha_n
    bool closing_nondegenerate = false;  // auxiliary cycle has >= 3 edges
};

AuditReport audit_params(const Params& params);

struct RegimeSplit {
    std::uint64_t M = 1;
    double p_slice = 0.0;
};

/// Splits large p into M slices of p/M, M = floor(p n^(k-1) / (ln n)^(2k+2)),
/// when p exceeds twice the regime window; otherwise M = 1.
RegimeSplit split_regime(std::uint64_t n, unsigned k, double p);

nlohmann::json to_json(const Overrides& o);
Overrides overrides_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Params& params);
nlohmann::json to_json(const AuditReport& report);

}  // namespace loosepack
