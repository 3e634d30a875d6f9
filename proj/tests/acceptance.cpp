// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "loosepack/experiment.hpp"
#include "loosepack/packer.hpp"
#include "loosepack/solver.hpp"
#include "loosepack/verifier.hpp"
#include "oracles.hpp"

using namespace loosepack;

namespace {

// Tolerances and sizes
constexpr int kSeedsPerDeskConfig = 20;
constexpr double kDeskBudgetSec = 300.0;
constexpr std::uint64_t kCouplingRuns = 100'000;
constexpr double kCouplingSigmas = 3.0;
constexpr double kCouplingBudgetSec = 120.0;
constexpr int kMassSchedules = 500;
constexpr double kMassTol = 1e-12;
constexpr int kSolverSmall = 200;
constexpr int kSolverLarge = 100;
constexpr double kSolverBudgetSec = 180.0;
constexpr double kAuditStepSumMax = 5.1e-7;
constexpr double kAuditRelTol = 1e-9;
constexpr int kCollisionSeeds = 100;
constexpr double kCollisionSlack = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

CandidateRef ref(CandidateSet c) { return std::make_shared<const CandidateSet>(std::move(c)); }

struct DeskConfig {
    std::uint64_t n;
    unsigned k;
};

Overrides desk_overrides(unsigned k) {
    Overrides ov;
    ov.omega_n = 30;
    ov.q = 0.3;
    ov.r = 0.5;
    ov.step1_prob = 0.05;
    ov.alpha_n = k == 3 ? 7 : 11;
    ov.N = 10;
    return ov;
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const Verdict& v) {
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

template <class... Args>
std::string format(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

Verdict cycle_validity() {
    const auto t0 = Clock::now();
    const std::vector<DeskConfig> requested{{12, 3}, {24, 3}, {60, 3}, {10, 4}, {22, 4}};
    const std::vector<DeskConfig> substitutes{{15, 4}, {24, 4}};
    std::uint64_t successes = 0, bad = 0, rejected = 0;
    auto run = [&](DeskConfig c) {
        Params P;
        try {
            P = derive_params(c.n, c.k, 0.1, 0.1, desk_overrides(c.k));
        } catch (const ParamError&) {
            ++rejected;  // (k-1) does not divide n: no loose Hamilton cycle exists
            return;
        }
        for (int s = 1; s <= kSeedsPerDeskConfig; ++s) {
            const auto res = pack(P, static_cast<std::uint64_t>(s));
            for (const auto& o : res.outcomes) {
                if (!o.success()) continue;
                ++successes;
                const bool ok = validate_loose_cycle(*o.cycle, c.n).ok() &&
                                oracle::is_loose_cycle(o.cycle->order, static_cast<unsigned>(c.n), c.k);
                bad += !ok;
            }
        }
    };
    for (auto c : requested) run(c);
    for (auto c : substitutes) run(c);
    const double sec = seconds_since(t0);
    return {bad == 0 && successes > 0 && sec < kDeskBudgetSec,
            format("%llu successes, %llu invalid, %llu configs rejected by (k-1)|n, %.1fs",
                   static_cast<unsigned long long>(successes), static_cast<unsigned long long>(bad),
                   static_cast<unsigned long long>(rejected), sec)};
}

Verdict coupling_exactness() {
    const auto t0 = Clock::now();
    const std::uint64_t n = 6;
    const unsigned k = 3;
    const auto q1 = ref(CandidateSet::all(n, k));
    const auto q2 = ref(CandidateSet::extend(n, k, 0, {1, 2}));
    const auto q3 = ref(CandidateSet::closing(n, k, {3, 4, 5}, 0, 1));
    const std::vector<std::pair<CandidateRef, double>> schedule{{q1, 0.2}, {q2, 0.3}, {q3, 0.5}};
    const auto tuples = oracle::colex_subsets(static_cast<unsigned>(n), k);

    std::string detail;
    bool pass = true;
    for (auto mode : {CouplingMode::Lazy, CouplingMode::Eager}) {
        std::map<KTuple, std::uint64_t> freq;
        std::uint64_t order_violations = 0;
        QueryLedger reference;
        for (std::uint64_t seed = 1; seed <= kCouplingRuns; ++seed) {
            SprinkleEngine eng(seed, mode);
            for (std::uint32_t s = 0; s < schedule.size(); ++s) eng.query({1, s + 1}, 1, schedule[s].first, schedule[s].second);
            for (const auto& e : eng.ledger().colored()) {
                ++freq[e];
                const auto u = eng.source().uniform(e);
                if (!u || !(*u <= replay_mass(eng.ledger(), e))) ++order_violations;
            }
            if (seed == 1) reference = eng.ledger();
        }
        double worst = 0.0;
        for (const auto& t : tuples) {
            const KTuple e{std::span<const Vertex>(t)};
            const double q = replay_mass(reference, e);
            const double f = static_cast<double>(freq[e]) / static_cast<double>(kCouplingRuns);
            const double sigma = std::sqrt(q * (1 - q) / static_cast<double>(kCouplingRuns));
            const double z = sigma > 0 ? std::fabs(f - q) / sigma : (f == q ? 0.0 : INFINITY);
            worst = std::max(worst, z);
        }
        const bool ok = worst <= kCouplingSigmas && order_violations == 0;
        pass = pass && ok;
        detail += format("%s max |z| %.2f, U_e>Q_e %llu; ", mode == CouplingMode::Lazy ? "lazy" : "eager", worst,
                         static_cast<unsigned long long>(order_violations));
    }
    const double sec = seconds_since(t0);
    pass = pass && sec < kCouplingBudgetSec;
    detail += format("%.1fs", sec);
    return {pass, detail};
}

Verdict mass_identity() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    std::uint64_t checked = 0;
    for (int sched = 0; sched < kMassSchedules; ++sched) {
        const std::uint64_t n = 6 + rng() % 6;
        const unsigned k = 3 + static_cast<unsigned>(rng() % 2);
        const auto tuples = oracle::colex_subsets(static_cast<unsigned>(n), k);
        QueryLedger L;
        std::map<KTuple, double> survival;
        const int records = 1 + static_cast<int>(rng() % 60);
        const bool tiny = sched % 7 == 0;
        std::uniform_real_distribution<double> P(0.0, 0.7);
        for (int r = 0; r < records; ++r) {
            std::vector<Vertex> verts(n);
            for (Vertex v = 0; v < n; ++v) verts[v] = v;
            std::shuffle(verts.begin(), verts.end(), rng);
            CandidateRef c;
            switch (rng() % 3) {
                case 0: c = ref(CandidateSet::all(n, k)); break;
                case 1: {
                    std::vector<Vertex> forb(verts.begin() + 1, verts.begin() + 1 + rng() % 3);
                    std::sort(forb.begin(), forb.end());
                    c = ref(CandidateSet::extend(n, k, verts[0], forb));
                    break;
                }
                default: {
                    std::vector<Vertex> free(verts.begin() + 2, verts.begin() + 2 + k + rng() % (n - k - 1));
                    std::sort(free.begin(), free.end());
                    c = ref(CandidateSet::closing(n, k, free, verts[0], verts[1]));
                }
            }
            const double p = tiny ? P(rng) * 1e-11 : P(rng);
            L.append({1, static_cast<std::uint32_t>(r + 1), 1, c, p, {}});
            for (const auto& t : tuples) {
                const KTuple e{std::span<const Vertex>(t)};
                auto& s = survival.try_emplace(e, 1.0).first->second;
                if (c->contains(e)) s *= 1.0 - p;
            }
        }
        for (const auto& [e, s] : survival) {
            worst = std::max(worst, std::fabs(replay_mass(L, e) - (1.0 - s)));
            ++checked;
        }
    }
    return {worst <= kMassTol, format("%d schedules, %llu tuples, max |diff| %.3g (tol %.0e)", kMassSchedules,
                                      static_cast<unsigned long long>(checked), worst, kMassTol)};
}

AuxInstance random_aux(unsigned L, double density, std::mt19937_64& rng) {
    AuxInstance inst;
    inst.k = 3;
    inst.node_cap = 0;
    for (Vertex v = 0; v < L; ++v) inst.vertices.push_back(v);
    inst.v0 = static_cast<Vertex>(rng() % L);
    std::bernoulli_distribution keep(density);
    for (const auto& s : oracle::colex_subsets(L, 3)) {
        if (!keep(rng)) continue;
        const KTuple e{std::span<const Vertex>(s)};
        std::uint8_t tags = kTagPlain;
        if (e.contains(inst.v0)) tags = static_cast<std::uint8_t>(1 + rng() % 3);
        inst.edges.push_back({e, tags});
    }
    return inst;
}

Verdict solver_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    int mismatches = 0, feasible = 0, total = 0;
    for (auto [L, count] : {std::pair{6u, kSolverSmall}, std::pair{8u, kSolverLarge}}) {
        for (int it = 0; it < count; ++it) {
            const double density = std::uniform_real_distribution<double>(0.15, 0.85)(rng);
            const AuxInstance inst = random_aux(L, density, rng);
            std::mt19937_64 srng(rng());
            const auto r = find_constrained_hc(inst, srng);
            const auto b = brute_force_hc(inst);
            ++total;
            feasible += b.count > 0;
            if (r.outcome == SolverOutcome::CapExceeded || r.found() != (b.count > 0)) ++mismatches;
        }
    }
    const double sec = seconds_since(t0);
    return {mismatches == 0 && sec < kSolverBudgetSec,
            format("%d instances (%d feasible), %d mismatches, %.1fs", total, feasible, mismatches, sec)};
}

Verdict audit_closed_forms() {
    const Params P = derive_params(1'000'000, 3, 0.5, 0.1);
    const AuditReport R = audit_params(P);
    bool pass = R.step_sum_formula < kAuditStepSumMax && R.max_summand_formula_rel_err < kAuditRelTol &&
                R.step_sum_formula <= R.step_sum_bound * (1 + kAuditRelTol) && R.identity_holds;
    std::uint64_t swept = 0, identity_fail = 0;
    for (unsigned k = 3; k <= 5; ++k) {
        for (std::uint64_t n = 12; n <= 10'000; ++n) {
            if (n % (k - 1) != 0) continue;
            const Params Q = derive_params(n, k, 0.5, 0.1, {}, true);
            ++swept;
            identity_fail += n - Q.K * (k - 1) - 1 != Q.alpha_n;
        }
    }
    pass = pass && identity_fail == 0;
    return {pass, format("n=1e6 k=3: S=%.4g, max summand rel err %.2g, S/((K-1)/n^2)=%.12f; identity %llu/%llu",
                         R.step_sum_formula, R.max_summand_formula_rel_err, R.step_sum_formula / R.step_sum_bound,
                         static_cast<unsigned long long>(swept - identity_fail),
                         static_cast<unsigned long long>(swept))};
}

Verdict disjointness() {
    std::uint64_t over = 0, oracle_mismatch = 0, runs = 0, total_coll = 0;
    double total_est = 0.0;
    for (auto c : {DeskConfig{24, 3}, DeskConfig{60, 3}, DeskConfig{24, 4}}) {
        const Params P = derive_params(c.n, c.k, 0.1, 0.1, desk_overrides(c.k));
        const double estimate = audit_params(P).collision_estimate;
        for (int s = 1; s <= kCollisionSeeds; ++s) {
            const auto res = pack(P, static_cast<std::uint64_t>(s));
            const auto sec = verify_packing(res.cycles, c.n, c.k);
            ++runs;
            total_coll += sec.collision_pairs;
            total_est += estimate;
            over += static_cast<double>(sec.collision_pairs) > kCollisionSlack * estimate;
            if (res.cycles.size() <= 10) {
                std::vector<std::vector<std::uint32_t>> orders;
                for (const auto& cy : res.cycles) orders.push_back(cy.order);
                oracle_mismatch += sec.collision_pairs != oracle::pairwise_collisions(orders, c.k);
            }
        }
    }
    return {over == 0 && oracle_mismatch == 0,
            format("%llu runs, %llu collisions vs estimate %.3g, %llu over 10x, %llu oracle mismatches",
                   static_cast<unsigned long long>(runs), static_cast<unsigned long long>(total_coll), total_est,
                   static_cast<unsigned long long>(over), static_cast<unsigned long long>(oracle_mismatch))};
}

Verdict embedding() {
    // p close to 1 with small per-query masses so that max Q_e <= p in some runs
    Overrides ov;
    ov.omega_n = 2;
    ov.q = 0.25;
    ov.A = std::vector<std::uint64_t>{2};
    ov.r = 0.6;
    ov.step1_prob = 0.01;
    ov.step1_cap = 3;
    ov.close_cap = 2;
    ov.alpha_n = 7;
    ov.N = 3;
    std::uint64_t clean = 0, clean_false = 0, dirty = 0;
    for (auto mode : {CouplingMode::Lazy, CouplingMode::Eager}) {
        const Params P = derive_params(24, 3, 0.93, 0.1, ov);
        for (std::uint64_t s = 1; s <= 200; ++s) {
            const auto res = pack(P, s, {mode});
            const auto m = verify_mass(res.engine.ledger(), P, {64, s, 0});
            const auto e = verify_embedding(res.engine.ledger(), res.engine.source(), P.p);
            if (m.max_q <= P.p) {
                ++clean;
                clean_false += !e.ok;
            } else {
                ++dirty;
            }
        }
    }

    // adversarial: one tuple queried ten times at 0.3
    int adversarial_detected = 0;
    const int adversarial_runs = 20;
    for (std::uint64_t s = 1; s <= adversarial_runs; ++s) {
        SprinkleEngine eng(s);
        const auto c = ref(CandidateSet::all(6, 3));
        for (std::uint32_t t = 1; t <= 10; ++t) eng.query({1, 1}, t, c, 0.3);
        const double p = 0.5;
        const auto e = verify_embedding(eng.ledger(), eng.source(), p);
        const bool witnessed = !e.ok && e.witness && e.witness_u > p && replay_mass(eng.ledger(), *e.witness) > p;
        adversarial_detected += witnessed;
    }
    return {clean > 0 && clean_false == 0 && adversarial_detected == adversarial_runs,
            format("%llu runs with max Q_e <= p (%llu embedding false), %llu runs above p; adversarial %d/%d "
                   "detected with witness",
                   static_cast<unsigned long long>(clean), static_cast<unsigned long long>(clean_false),
                   static_cast<unsigned long long>(dirty), adversarial_detected, adversarial_runs)};
}

Verdict determinism() {
    int configs = 0, differ = 0;
    for (auto c : {DeskConfig{12, 3}, DeskConfig{24, 3}, DeskConfig{15, 4}}) {
        ExperimentConfig cfg;
        cfg.n = c.n;
        cfg.k = c.k;
        cfg.p = 0.1;
        cfg.overrides = desk_overrides(c.k);
        cfg.seeds = {1};
        cfg.trials = 5;
        cfg.mass_sample = 64;
        for (auto mode : {CouplingMode::Lazy, CouplingMode::Eager}) {
            cfg.mode = mode;
            cfg.threads = 1;
            const auto a = to_json(run_experiment(cfg)).dump();
            cfg.threads = 4;
            const auto b = to_json(run_experiment(cfg)).dump();
            ++configs;
            differ += a != b;

            const Params P = derive_params(c.n, c.k, 0.1, 0.1, cfg.overrides);
            for (std::uint64_t s = 1; s <= 5; ++s) {
                const auto r1 = pack(P, s, {mode});
                const auto r2 = pack(P, s, {mode});
                std::ostringstream l1, l2;
                r1.engine.ledger().write_jsonl(l1);
                r2.engine.ledger().write_jsonl(l2);
                differ += !(r1.engine.ledger() == r2.engine.ledger()) || l1.str() != l2.str();
            }
        }
    }
    return {differ == 0, format("%d configs x 5 seeds, %d differences", configs, differ)};
}

}  // namespace

int main() {
    const std::vector<std::function<Verdict()>> criteria{cycle_validity, coupling_exactness, mass_identity,
                                                         solver_oracle,  audit_closed_forms, disjointness,
                                                         embedding,      determinism};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i]();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        report(static_cast<int>(i + 1), v);
    }
    return failures;
}
