#include <doctest.h>

#include <cmath>

#include "loosepack/params.hpp"

using namespace loosepack;

namespace {

double binom(double n, unsigned k) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

std::string field_of(auto&& fn) {
    try {
        fn();
    } catch (const ParamError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("small examples") {
    Overrides ov;
    ov.alpha_n = 3;
    ov.q = 0.01;
    const Params P = derive_params(12, 3, 0.1, 0.1, ov, true);
    CHECK(P.K == 4);
    CHECK(P.N == 3);  // floor(0.9 * 220 * 0.1 * 2 / 12)
    REQUIRE(P.A.size() == 3);
    // 2 ln 12 / (0.01 * C(9,2)) = 13.8
    CHECK(P.cap_for_step(2) == 14);
    CHECK(P.A_formula[0] == doctest::Approx(2 * std::log(12.0) / (0.01 * 36)));
    CHECK(P.extension_domain(4) == doctest::Approx(binom(12 - 3 * 2 - 1, 2)));
}

TEST_CASE("default alpha and omega") {
    const Params P = derive_params(12, 3, 0.1, 0.1);
    CHECK(P.omega_n == doctest::Approx(std::pow(std::log(12.0), 1.0 / 18)));
    CHECK(P.alpha_n == 7);
    CHECK(P.K == 2);
    CHECK(P.step1_prob == doctest::Approx(std::pow(12.0, -3)));
    CHECK(P.step1_cap == 2);
    CHECK(P.close_cap == 2);
    CHECK(P.q == doctest::Approx(1.0 / (144 * std::log(12.0))));
    CHECK(P.r == doctest::Approx(P.omega_n * std::log(12.0) / 49));
}

TEST_CASE("derived constants satisfy their invariants") {
    for (unsigned k = 3; k <= 5; ++k) {
        for (std::uint64_t n = 4 * k; n <= 10000; n = n * 3 / 2) {
            const std::uint64_t nn = n - n % (k - 1);
            const Params P = derive_params(nn, k, 0.5, 0.1, {}, true);
            INFO("n=" << nn << " k=" << k);
            CHECK((P.alpha_n + 1) % (2 * (k - 1)) == 0);
            CHECK(nn - P.K * (k - 1) - 1 == P.alpha_n);
            CHECK(P.A.size() == P.K - 1);
            for (std::size_t i = 0; i < P.A.size(); ++i) {
                CHECK(static_cast<double>(P.A[i]) >= P.A_formula[i]);
                CHECK(static_cast<double>(P.A[i]) < std::max(1.0, P.A_formula[i]) + 1.0);
                if (i > 0) CHECK(P.A_formula[i] >= P.A_formula[i - 1]);
            }
            const AuditReport R = audit_params(P);
            CHECK(R.identity_holds);
            CHECK(R.step_sum <= R.step_sum_formula * (1 + 1e-9));
            CHECK(R.step_sum_formula == doctest::Approx(R.step_sum_bound).epsilon(1e-9));
            CHECK(R.max_summand_formula_rel_err < 1e-9);
        }
    }
}

TEST_CASE("overrides win") {
    Overrides ov;
    ov.omega_n = 30;
    ov.q = 0.3;
    ov.r = 0.5;
    ov.step1_prob = 0.05;
    ov.alpha_n = 7;
    ov.N = 10;
    ov.A = std::vector<std::uint64_t>{5};
    const Params P = derive_params(24, 3, 0.1, 0.1, ov);
    CHECK(P.omega_n == 30);
    CHECK(P.step1_cap == 30);
    CHECK(P.close_cap == 30);
    CHECK(P.N == 10);
    CHECK(P.K == 8);
    for (auto a : P.A) CHECK(a == 5);

    ov.A = std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6, 7};
    const Params Q = derive_params(24, 3, 0.1, 0.1, ov);
    CHECK(Q.cap_for_step(8) == 7);
    ov.A = std::vector<std::uint64_t>{1, 2};
    CHECK(field_of([&] { derive_params(24, 3, 0.1, 0.1, ov); }) == "A");
}

TEST_CASE("precondition errors name the field") {
    CHECK(field_of([] { derive_params(12, 2, 0.1, 0.1); }) == "k");
    CHECK(field_of([] { derive_params(12, 9, 0.1, 0.1); }) == "k");
    CHECK(field_of([] { derive_params(5, 3, 0.1, 0.1); }) == "n");
    CHECK(field_of([] { derive_params(10, 4, 0.1, 0.1); }) == "n");
    CHECK(field_of([] { derive_params(22, 4, 0.1, 0.1); }) == "n");
    CHECK(field_of([] { derive_params(12, 3, 0.0, 0.1); }) == "p");
    CHECK(field_of([] { derive_params(12, 3, 1.0, 0.1); }) == "p");
    CHECK(field_of([] { derive_params(12, 3, 0.1, 0.5); }) == "epsilon");
    Overrides ov;
    ov.alpha_n = 5;
    CHECK(field_of([&] { derive_params(12, 3, 0.1, 0.1, ov); }) == "alpha_n");
    ov.alpha_n = 11;
    CHECK(field_of([&] { derive_params(12, 3, 0.1, 0.1, ov); }) == "alpha_n");
    Overrides om;
    om.omega_n = 0.5;
    CHECK(field_of([&] { derive_params(12, 3, 0.1, 0.1, om); }) == "omega_n");
    Overrides big;
    big.omega_n = 30;
    big.alpha_n = 3;
    CHECK(field_of([&] { derive_params(12, 3, 0.1, 0.1, big); }) == "r");
    CHECK(derive_params(12, 3, 0.1, 0.1, big, true).r == 1.0);
}

TEST_CASE("audit closed forms") {
    const Params P = derive_params(1'000'000, 3, 0.5, 0.1);
    const AuditReport R = audit_params(P);
    const double n = 1e6;
    CHECK(R.step_sum_formula < 5.1e-7);
    CHECK(R.half_over_n == doctest::Approx(5e-7));
    CHECK(R.step1_failure_bound == doctest::Approx(std::exp(-binom(n, 3) / (n * n * n) * P.omega_n)));
    CHECK(R.close_failure_bound == doctest::Approx(std::pow(1 - 1.0 / 6, P.omega_n)));
    CHECK(R.round_failure_bound ==
          doctest::Approx(std::min(1.0, R.step1_failure_bound + R.step_sum + R.close_failure_bound)));
    CHECK(R.expectation_low == doctest::Approx(0.4));
    CHECK(R.expectation_high == doctest::Approx(0.475));
    CHECK(R.regime_window == doctest::Approx(std::pow(std::log(n), 8) / (n * n)));
    CHECK(R.identity_holds);
    CHECK(R.closing_nondegenerate);
    CHECK(R.mcdiarmid_exponent < 0);
}

TEST_CASE("split_regime") {
    const std::uint64_t n = 1'000'000;
    const double window = std::pow(std::log(1e6), 8) / 1e12;
    const auto s = split_regime(n, 3, 7.9 * window);
    CHECK(s.M == 7);
    CHECK(s.p_slice == doctest::Approx(7.9 * window / 7));
    CHECK(split_regime(n, 3, 1.5 * window).M == 1);
    CHECK(split_regime(n, 3, 0.5 * window).M == 1);
    CHECK(split_regime(n, 3, 0.5 * window).p_slice == doctest::Approx(0.5 * window));
}

TEST_CASE("json") {
    Overrides ov;
    ov.q = 0.3;
    ov.A = std::vector<std::uint64_t>{2, 3};
    const auto back = overrides_from_json(to_json(ov));
    CHECK(back.q == ov.q);
    CHECK(back.A == ov.A);
    CHECK_FALSE(back.r);
    CHECK(Overrides{}.empty());
    CHECK_THROWS_AS(overrides_from_json(nlohmann::json{{"bogus", 1}}), ParamError);

    const auto j = to_json(derive_params(1'000'000, 3, 0.5, 0.1));
    CHECK(j.at("A").is_object());
    CHECK(j.at("A").at("count") == j.at("K").get<std::uint64_t>() - 1);
    const auto small = to_json(derive_params(12, 3, 0.1, 0.1));
    CHECK(small.at("A").is_array());
}
