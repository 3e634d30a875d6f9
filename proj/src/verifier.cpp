#include "loosepack/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "loosepack/binomial.hpp"

namespace loosepack {
namespace {

bool in_extend_record(const QueryLedger& ledger, const KTuple& e) {
    const CandidateSet* last = nullptr;
    for (const auto& rec : ledger.records()) {
        const CandidateSet* c = rec.candidate.get();
        if (c == last) continue;
        last = c;
        if (std::holds_alternative<CandidateSet::Extend>(c->variant()) && c->contains(e)) return true;
    }
    return false;
}

}  // namespace

PackingSection verify_packing(std::span<const LooseCycle> cycles, std::uint64_t n, unsigned k) {
    PackingSection s;
    s.cycles = cycles.size();
    std::vector<std::size_t> index;
    std::vector<LooseCycle> valid;
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        const auto v = cycles[i].k == k ? validate_loose_cycle(cycles[i], n)
                                        : CycleValidation{CycleDefect::WrongEdgeCount, "uniformity mismatch"};
        if (v) {
            index.push_back(i);
            valid.push_back(cycles[i]);
        } else {
            s.invalid.emplace_back(i, std::string(to_string(*v.defect)) + ": " + v.detail);
        }
    }
    s.valid = valid.size();
    // invalid cycles may not even have well-formed edges
    s.collisions = collision_report(valid);
    for (auto& c : s.collisions) {
        for (auto& i : c.cycles) i = index[i];
    }
    for (const auto& c : s.collisions) {
        const std::uint64_t m = c.cycles.size();
        s.collision_pairs += m * (m - 1) / 2;
    }
    return s;
}

MassSection verify_mass(const QueryLedger& ledger, const Params& P, const MassPlan& plan) {
    MassSection s;
    s.window_low = P.p * (1.0 - 2.0 * P.epsilon);
    s.window_high = P.p * (1.0 - P.epsilon / 2.0);

    auto note = [&](const KTuple& e, double q) {
        if (!s.argmax || q > s.max_q) {
            s.max_q = q;
            s.argmax = e;
        }
        if (q > P.p) s.violations.push_back(e);
    };

    const auto colored = ledger.colored();
    s.colored = colored.size();
    double sum = 0.0;
    for (const auto& e : colored) {
        const double q = replay_mass(ledger, e);
        sum += q;
        note(e, q);
    }
    if (!colored.empty()) s.mean_colored_q = sum / static_cast<double>(colored.size());

    // Step-1 factor is shared by every tuple; closing factors need membership.
    double log_all = 0.0;
    for (const auto& rec : ledger.records()) {
        if (std::holds_alternative<CandidateSet::All>(rec.candidate->variant())) log_all += std::log1p(-rec.prob);
    }
    const Rank total = binomial(P.n, P.k);
    Rng rng(derive_seed(plan.seed, 0, 0, 0, Stream::Sample));
    std::set<KTuple> seen(colored.begin(), colored.end());
    double sum_q = 0.0, sum_lin = 0.0;
    for (std::size_t tries = 0; s.sampled < plan.sample_size && tries < 8 * plan.sample_size; ++tries) {
        const KTuple e = tuple_unrank(uniform_rank(rng, total - 1), P.k, P.n);
        if (seen.count(e) || in_extend_record(ledger, e)) continue;
        double log_s = log_all, lin = 0.0;
        const CandidateSet* last = nullptr;
        bool member = false;
        for (const auto& rec : ledger.records()) {
            const CandidateSet* c = rec.candidate.get();
            if (c != last) {
                last = c;
                member = c->contains(e);
            }
            if (!member) continue;
            lin += rec.prob;
            if (std::holds_alternative<CandidateSet::Closing>(c->variant())) log_s += std::log1p(-rec.prob);
        }
        const double q = -std::expm1(log_s);
        if (s.sampled < plan.spot_checks) {
            s.spot_check_max_diff = std::max(s.spot_check_max_diff, std::fabs(q - replay_mass(ledger, e)));
        }
        ++s.sampled;
        sum_q += q;
        sum_lin += lin;
        note(e, q);
    }
    if (s.sampled > 0) {
        s.mean_sampled_q = sum_q / static_cast<double>(s.sampled);
        s.mean_sampled_linear = sum_lin / static_cast<double>(s.sampled);
    }
    s.inside_window = s.mean_sampled_q >= s.window_low && s.mean_sampled_q <= s.window_high;
    return s;
}

double mcdiarmid_bound(double lambda, std::span<const std::pair<double, double>> ranges) {
    if (!(lambda >= 0.0)) throw Error("mcdiarmid_bound: lambda must be non-negative");
    if (ranges.empty()) throw Error("mcdiarmid_bound: no ranges");
    long double denom = 0.0L;
    for (const auto& [a, b] : ranges) {
        const long double w = static_cast<long double>(b) - a;
        denom += w * w;
    }
    if (lambda == 0.0) return 2.0;
    if (denom == 0.0L) return 0.0;
    return static_cast<double>(2.0L * std::exp(-2.0L * lambda * lambda / denom));
}

McdiarmidInstance mcdiarmid_instance(const Params& P) {
    McdiarmidInstance m;
    const long double ln_n = std::log(static_cast<long double>(P.n));
    const long double om = P.omega_n;
    m.lambda = P.epsilon * P.p / 3.0;
    m.range_width = static_cast<double>(2.0L * om * om * ln_n /
                                        std::pow(static_cast<long double>(P.alpha_n), P.k - 1.0L));
    if (P.N == 0) return m;
    if (P.N <= (1u << 20)) {
        std::vector<std::pair<double, double>> ranges(P.N, {0.0, m.range_width});
        m.bound = mcdiarmid_bound(m.lambda, ranges);
    } else {
        const long double w = m.range_width;
        m.bound = static_cast<double>(2.0L * std::exp(-2.0L * m.lambda * m.lambda / (P.N * w * w)));
    }
    m.exponent = static_cast<double>(-static_cast<long double>(P.epsilon) * P.epsilon * P.p * P.p *
                                     std::pow(static_cast<long double>(P.alpha_n), 2.0L * (P.k - 1)) /
                                     (18.0L * P.N * om * om * om * om * ln_n * ln_n));
    return m;
}

EmbeddingSection verify_embedding(const QueryLedger& ledger, const UniformSource& source, double p) {
    EmbeddingSection s;
    KTuple w;
    s.ok = final_embedding_check(ledger, source, p, &w);
    if (!s.ok) {
        s.witness = w;
        s.witness_u = *source.uniform(w);
    }
    return s;
}

std::vector<KTuple> query_accounting_violations(const QueryLedger& ledger, std::span<const KTuple> tuples) {
    std::vector<KTuple> out;
    for (const auto& e : tuples) {
        std::map<std::uint32_t, std::uint32_t> step_of_round;
        bool bad = false;
        const CandidateSet* last = nullptr;
        for (const auto& rec : ledger.records()) {
            const CandidateSet* c = rec.candidate.get();
            if (c == last) continue;
            last = c;
            if (std::holds_alternative<CandidateSet::All>(c->variant()) || !c->contains(e)) continue;
            auto [it, fresh] = step_of_round.emplace(rec.round, rec.step);
            if (!fresh && it->second != rec.step) bad = true;
        }
        if (bad) out.push_back(e);
    }
    return out;
}

VerificationReport verify_run(const PackResult& run, const Params& P, const MassPlan& plan) {
    VerificationReport r;
    const auto& ledger = run.engine.ledger();
    r.packing = verify_packing(run.cycles, P.n, P.k);
    r.mass = verify_mass(ledger, P, plan);
    if (run.engine.mode() != CouplingMode::Independent) {
        r.embedding = verify_embedding(ledger, run.engine.source(), P.p);
    }
    const auto colored = ledger.colored();
    r.accounting_violations = query_accounting_violations(ledger, colored).size();
    r.audit = audit_params(P);
    r.mcdiarmid = mcdiarmid_instance(P);
    return r;
}

nlohmann::json to_json(const PackingSection& s) {
    nlohmann::json invalid = nlohmann::json::array();
    for (const auto& [i, d] : s.invalid) invalid.push_back({{"cycle", i}, {"defect", d}});
    nlohmann::json coll = nlohmann::json::array();
    for (const auto& c : s.collisions) coll.push_back({{"tuple", tuple_to_json(c.tuple)}, {"cycles", c.cycles}});
    return {{"cycles", s.cycles},
            {"valid", s.valid},
            {"invalid", invalid},
            {"collisions", coll},
            {"collision_tuples", s.collisions.size()},
            {"collision_pairs", s.collision_pairs}};
}

nlohmann::json to_json(const MassSection& s) {
    nlohmann::json viol = nlohmann::json::array();
    for (const auto& e : s.violations) viol.push_back(tuple_to_json(e));
    return {{"colored", s.colored},
            {"sampled", s.sampled},
            {"max_Qe", s.max_q},
            {"argmax", s.argmax ? tuple_to_json(*s.argmax) : nlohmann::json(nullptr)},
            {"violations", viol},
            {"mean_colored_Qe", s.mean_colored_q},
            {"mean_sampled_Qe", s.mean_sampled_q},
            {"mean_sampled_linear", s.mean_sampled_linear},
            {"spot_check_max_diff", s.spot_check_max_diff},
            {"window", {s.window_low, s.window_high}},
            {"inside_window", s.inside_window}};
}

nlohmann::json to_json(const EmbeddingSection& s) {
    nlohmann::json j = {{"ok", s.ok}};
    if (s.witness) {
        j["witness"] = tuple_to_json(*s.witness);
        j["witness_u"] = s.witness_u;
    }
    return j;
}

nlohmann::json to_json(const McdiarmidInstance& m) {
    return {{"lambda", m.lambda}, {"range_width", m.range_width}, {"bound", m.bound}, {"exponent", m.exponent}};
}

nlohmann::json to_json(const VerificationReport& r) {
    return {{"packing", to_json(r.packing)},
            {"mass", to_json(r.mass)},
            {"embedding", to_json(r.embedding)},
            {"accounting_violations", r.accounting_violations},
            {"audit", to_json(r.audit)},
            {"mcdiarmid", to_json(r.mcdiarmid)}};
}

}  // namespace loosepack
