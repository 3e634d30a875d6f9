#include "loosepack/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "loosepack/binomial.hpp"

namespace loosepack {
namespace {

constexpr double kMaxCap = 0x1.0p53;

void require_prob(const char* field, double v, bool allow_zero) {
    if (!(v <= 1.0) || !(allow_zero ? v >= 0.0 : v > 0.0)) {
        throw ParamError(field, "must lie in " + std::string(allow_zero ? "[0,1]" : "(0,1]") + ", got " +
                                    std::to_string(v));
    }
}

std::uint64_t ceil_cap(const char* field, long double v) {
    if (!(v < kMaxCap)) throw ParamError(field, "cap " + std::to_string(static_cast<double>(v)) + " too large");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(v)));
}

}  // namespace

bool Overrides::empty() const noexcept {
    return !omega_n && !q && !alpha_n && !A && !r && !N && !step1_prob && !step1_cap && !close_cap;
}

long double Params::extension_domain(std::uint64_t j) const {
    return binomial_real(static_cast<long double>(n - (j - 1) * (k - 1) - 1), k - 1);
}

Params derive_params(std::uint64_t n, unsigned k, double p, double epsilon, const Overrides& ov,
                     bool desk_scale) {
    if (k < 3 || k > kMaxUniformity) throw ParamError("k", "must lie in [3, 8], got " + std::to_string(k));
    if (n < 2 * k || n > kMaxRankedVertices) throw ParamError("n", "out of range: " + std::to_string(n));
    if (n % (k - 1) != 0) {
        throw ParamError("n", "(k-1) must divide n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
    }
    if (!(p > 0.0 && p < 1.0)) throw ParamError("p", "must lie in (0,1), got " + std::to_string(p));
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw ParamError("epsilon", "must lie in (0,1/2), got " + std::to_string(epsilon));
    }

    Params P;
    P.n = n;
    P.k = k;
    P.p = p;
    P.epsilon = epsilon;
    P.desk_scale = desk_scale;
    P.overrides = ov;

    const long double ln_n = std::log(static_cast<long double>(n));
    const long double nk1 = std::pow(static_cast<long double>(n), static_cast<long double>(k - 1));

    P.omega_n = ov.omega_n ? *ov.omega_n : static_cast<double>(std::pow(ln_n, 1.0L / (6.0L * k)));
    if (!(P.omega_n >= 1.0) || !std::isfinite(P.omega_n)) {
        throw ParamError("omega_n", "must be a finite real >= 1, got " + std::to_string(P.omega_n));
    }

    if (ov.q) {
        require_prob("q", *ov.q, true);
        P.q = *ov.q;
    } else {
        P.q = static_cast<double>(1.0L / (nk1 * ln_n));
    }

    const std::uint64_t mod = 2 * (k - 1);
    if (ov.alpha_n) {
        P.alpha_n = *ov.alpha_n;
        if ((P.alpha_n + 1) % mod != 0) {
            throw ParamError("alpha_n", "2(k-1) must divide alpha_n+1, got alpha_n=" + std::to_string(P.alpha_n));
        }
    } else {
        const long double om = P.omega_n;
        const long double target = static_cast<long double>(n) / (om * om * om * ln_n);
        const auto lo = static_cast<std::uint64_t>(std::ceil(target));
        const std::uint64_t window = 2 * static_cast<std::uint64_t>(k - 1) * (k - 1);
        bool found = false;
        for (std::uint64_t a = lo; a <= lo + window; ++a) {
            if ((a + 1) % mod == 0 && a + 1 <= n && (n - 1 - a) % (k - 1) == 0) {
                P.alpha_n = a;
                found = true;
                break;
            }
        }
        if (!found) throw ParamError("alpha_n", "divisibility unsatisfiable in search window");
    }
    if (P.alpha_n + (k - 1) + 1 > n) {
        throw ParamError("alpha_n", "leaves no room for a path edge: alpha_n=" + std::to_string(P.alpha_n));
    }
    if ((n - 1 - P.alpha_n) % (k - 1) != 0) {
        throw ParamError("alpha_n", "(k-1) must divide n-1-alpha_n");
    }
    P.K = (n - 1 - P.alpha_n) / (k - 1);

    const std::uint64_t steps = P.K - 1;
    P.A_formula.resize(steps);
    P.A.resize(steps);
    for (std::uint64_t j = 2; j <= P.K; ++j) {
        const long double c = P.extension_domain(j);
        P.A_formula[j - 2] = P.q > 0.0 ? static_cast<double>(2.0L * ln_n / (P.q * c))
                                       : std::numeric_limits<double>::infinity();
    }
    if (ov.A) {
        const auto& a = *ov.A;
        if (a.size() != 1 && a.size() != steps) {
            throw ParamError("A", "expected 1 or K-1=" + std::to_string(steps) + " values, got " +
                                      std::to_string(a.size()));
        }
        for (std::uint64_t i = 0; i < steps; ++i) P.A[i] = a.size() == 1 ? a[0] : a[i];
    } else {
        if (steps > 0 && P.q == 0.0) throw ParamError("q", "q = 0 needs an explicit A schedule");
        for (std::uint64_t i = 0; i < steps; ++i) P.A[i] = ceil_cap("A", P.A_formula[i]);
    }

    if (ov.r) {
        require_prob("r", *ov.r, true);
        P.r = *ov.r;
    } else {
        const long double r = P.omega_n * ln_n /
                              std::pow(static_cast<long double>(P.alpha_n), static_cast<long double>(k - 1));
        if (r >= 1.0L) {
            if (!desk_scale) {
                throw ParamError("r", "derived value " + std::to_string(static_cast<double>(r)) +
                                          " >= 1; pass desk-scale mode or override r");
            }
            P.r = 1.0;
        } else {
            P.r = static_cast<double>(r);
        }
    }

    if (ov.step1_prob) {
        require_prob("step1_prob", *ov.step1_prob, true);
        P.step1_prob = *ov.step1_prob;
    } else {
        P.step1_prob = static_cast<double>(std::pow(static_cast<long double>(n), -static_cast<long double>(k)));
    }
    P.step1_cap = ov.step1_cap ? *ov.step1_cap : ceil_cap("step1_cap", P.omega_n);
    P.close_cap = ov.close_cap ? *ov.close_cap : ceil_cap("close_cap", P.omega_n);

    if (ov.N) {
        P.N = *ov.N;
    } else {
        const long double x = (1.0L - epsilon) * binomial_real(static_cast<long double>(n), k) * p *
                              static_cast<long double>(k - 1) / static_cast<long double>(n);
        // guard against x landing a hair below an exact integer
        P.N = static_cast<std::uint64_t>(std::floor(x * (1.0L + 1e-12L)));
    }
    return P;
}

AuditReport audit_params(const Params& P) {
    AuditReport R;
    const long double n = static_cast<long double>(P.n);
    const long double ln_n = std::log(n);
    const long double inv_n2 = 1.0L / (n * n);

    long double s = 0.0L, s_formula = 0.0L, max_term = 0.0L, max_err = 0.0L;
    for (std::uint64_t j = 2; j <= P.K; ++j) {
        const long double c = P.extension_domain(j);
        const long double term = std::exp(-static_cast<long double>(P.q) * P.cap_for_step(j) * c);
        s += term;
        max_term = std::max(max_term, term);
        const long double tf = std::exp(-static_cast<long double>(P.q) * P.A_formula[j - 2] * c);
        s_formula += tf;
        max_err = std::max(max_err, std::fabs(tf - inv_n2) / inv_n2);
    }
    R.step_sum = static_cast<double>(s);
    R.step_sum_formula = static_cast<double>(s_formula);
    R.max_summand = static_cast<double>(max_term);
    R.max_summand_formula_rel_err = static_cast<double>(max_err);
    R.step_sum_bound = static_cast<double>(static_cast<long double>(P.K - 1) * inv_n2);
    R.half_over_n = static_cast<double>(0.5L / n);

    const long double cnk = binomial_real(n, P.k);
    R.step1_failure_bound = static_cast<double>(std::exp(-std::pow(n, -static_cast<long double>(P.k)) * cnk * P.omega_n));
    R.close_failure_bound = std::pow(1.0 - 1.0 / (2.0 * P.k), P.omega_n);
    R.round_failure_bound = std::min(1.0, R.step1_failure_bound + R.step_sum + R.close_failure_bound);

    double max_a = 0.0;
    for (auto a : P.A) max_a = std::max(max_a, static_cast<double>(a));
    R.p_prime = P.step1_prob * static_cast<double>(P.step1_cap) +
                std::max(P.q * max_a, P.r * static_cast<double>(P.close_cap));
    R.p_prime_formula = static_cast<double>(P.omega_n * std::pow(n, -static_cast<long double>(P.k))) +
                        std::max(P.q * max_a, P.r * P.omega_n);
    const long double pairs = static_cast<long double>(P.N) * (static_cast<long double>(P.N) - 1.0L) / 2.0L;
    R.collision_estimate = static_cast<double>(cnk * pairs * R.p_prime * R.p_prime);

    R.expectation_low = P.p * (1.0 - 2.0 * P.epsilon);
    R.expectation_high = P.p * (1.0 - P.epsilon / 2.0);
    if (P.N > 0) {
        const long double om = P.omega_n;
        R.mcdiarmid_exponent = static_cast<double>(
            -static_cast<long double>(P.epsilon * P.epsilon) * P.p * P.p *
            std::pow(static_cast<long double>(P.alpha_n), 2.0L * (P.k - 1)) /
            (18.0L * P.N * om * om * om * om * ln_n * ln_n));
    }
    R.regime_window = static_cast<double>(std::pow(ln_n, 2.0L * P.k + 2.0L) /
                                           std::pow(n, static_cast<long double>(P.k - 1)));
    R.in_regime_window = P.p >= R.regime_window;
    R.identity_holds = P.n - P.K * (P.k - 1) - 1 == P.alpha_n;
    R.closing_nondegenerate = (P.alpha_n + 1) / (P.k - 1) >= 3;
    return R;
}

RegimeSplit split_regime(std::uint64_t n, unsigned k, double p) {
    const long double ln_n = std::log(static_cast<long double>(n));
    const long double x = p * std::pow(static_cast<long double>(n), static_cast<long double>(k - 1)) /
                          std::pow(ln_n, 2.0L * k + 2.0L);
    RegimeSplit s;
    s.M = x > 2.0L ? static_cast<std::uint64_t>(std::floor(x)) : 1;
    s.p_slice = p / static_cast<double>(s.M);
    return s;
}

nlohmann::json to_json(const Overrides& o) {
    nlohmann::json j = nlohmann::json::object();
    if (o.omega_n) j["omega_n"] = *o.omega_n;
    if (o.q) j["q"] = *o.q;
    if (o.alpha_n) j["alpha_n"] = *o.alpha_n;
    if (o.A) j["A"] = *o.A;
    if (o.r) j["r"] = *o.r;
    if (o.N) j["N"] = *o.N;
    if (o.step1_prob) j["step1_prob"] = *o.step1_prob;
    if (o.step1_cap) j["step1_cap"] = *o.step1_cap;
    if (o.close_cap) j["close_cap"] = *o.close_cap;
    return j;
}

Overrides overrides_from_json(const nlohmann::json& j) {
    Overrides o;
    static const char* known[] = {"omega_n", "q", "alpha_n", "A", "r", "N", "step1_prob", "step1_cap", "close_cap"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ParamError("overrides." + key, "unknown override");
        }
    }
    try {
        if (j.contains("omega_n")) o.omega_n = j.at("omega_n").get<double>();
        if (j.contains("q")) o.q = j.at("q").get<double>();
        if (j.contains("alpha_n")) o.alpha_n = j.at("alpha_n").get<std::uint64_t>();
        if (j.contains("A")) {
            const auto& a = j.at("A");
            o.A = a.is_array() ? a.get<std::vector<std::uint64_t>>()
                               : std::vector<std::uint64_t>{a.get<std::uint64_t>()};
        }
        if (j.contains("r")) o.r = j.at("r").get<double>();
        if (j.contains("N")) o.N = j.at("N").get<std::uint64_t>();
        if (j.contains("step1_prob")) o.step1_prob = j.at("step1_prob").get<double>();
        if (j.contains("step1_cap")) o.step1_cap = j.at("step1_cap").get<std::uint64_t>();
        if (j.contains("close_cap")) o.close_cap = j.at("close_cap").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParamError("overrides", e.what());
    }
    return o;
}

nlohmann::json to_json(const Params& P) {
    nlohmann::json a = P.A;
    if (P.A.size() > 64) {
        const auto [lo, hi] = std::minmax_element(P.A.begin(), P.A.end());
        a = {{"count", P.A.size()}, {"min", *lo}, {"max", *hi}, {"first", P.A.front()}, {"last", P.A.back()}};
    }
    return {
        {"n", P.n},
        {"k", P.k},
        {"p", P.p},
        {"epsilon", P.epsilon},
        {"omega_n", P.omega_n},
        {"q", P.q},
        {"alpha_n", P.alpha_n},
        {"K", P.K},
        {"A", a},
        {"r", P.r},
        {"N", P.N},
        {"step1_prob", P.step1_prob},
        {"step1_cap", P.step1_cap},
        {"close_cap", P.close_cap},
        {"desk_scale", P.desk_scale},
        {"overrides", to_json(P.overrides)},
    };
}

nlohmann::json to_json(const AuditReport& R) {
    return {
        {"step_sum", R.step_sum},
        {"step_sum_formula", R.step_sum_formula},
        {"max_summand", R.max_summand},
        {"max_summand_formula_rel_err", R.max_summand_formula_rel_err},
        {"step_sum_bound", R.step_sum_bound},
        {"half_over_n", R.half_over_n},
        {"step1_failure_bound", R.step1_failure_bound},
        {"close_failure_bound", R.close_failure_bound},
        {"round_failure_bound", R.round_failure_bound},
        {"p_prime", R.p_prime},
        {"p_prime_formula", R.p_prime_formula},
        {"collision_estimate", R.collision_estimate},
        {"expectation_low", R.expectation_low},
        {"expectation_high", R.expectation_high},
        {"mcdiarmid_exponent", R.mcdiarmid_exponent},
        {"regime_window", R.regime_window},
        {"in_regime_window", R.in_regime_window},
        {"identity_holds", R.identity_holds},
        {"closing_nondegenerate", R.closing_nondegenerate},
    };
}

}  // namespace loosepack
