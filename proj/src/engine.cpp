#include "loosepack/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "loosepack/binomial.hpp"

namespace loosepack {
namespace {

constexpr std::uint64_t kMaxSuccesses = 1u << 24;
constexpr std::uint64_t kMaxEagerMembers = 1u << 20;

double unit_double(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t draw_count(const Rank& size, double prob, Rng& rng) {
    if (prob == 0.0 || size == 0) return 0;
    if (prob == 1.0) {
        if (size > kMaxSuccesses) throw RangeError("candidate set too large to color entirely: " + size.str());
        return size.convert_to<std::uint64_t>();
    }
    std::uint64_t count;
    if (size <= Rank(std::numeric_limits<std::int64_t>::max())) {
        std::binomial_distribution<std::int64_t> dist(size.convert_to<std::int64_t>(), prob);
        count = static_cast<std::uint64_t>(dist(rng));
    } else {
        // |c| beyond 2^63: Poisson(|c| p) is within total variation p of the binomial
        const double mean = to_double(size) * prob;
        if (!(mean < 1e15)) throw RangeError("expected success count overflows");
        std::poisson_distribution<std::int64_t> dist(mean);
        count = static_cast<std::uint64_t>(dist(rng));
    }
    if (count > kMaxSuccesses) throw RangeError("success count " + std::to_string(count) + " too large");
    return count;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint32_t round, std::uint32_t step, std::uint32_t rep,
                          Stream stream) {
    using simd::mix64;
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h + round);
    h = mix64(h ^ ((static_cast<std::uint64_t>(step) << 32) | rep));
    return mix64(h + static_cast<std::uint64_t>(stream));
}

Rank uniform_rank(Rng& rng, const Rank& bound) {
    if (bound <= Rank(std::numeric_limits<std::uint64_t>::max())) {
        std::uniform_int_distribution<std::uint64_t> dist(0, bound.convert_to<std::uint64_t>());
        return Rank(dist(rng));
    }
    const unsigned bits = boost::multiprecision::msb(bound) + 1;
    const Rank mask = (Rank(1) << (bits - 1)) - 1 + (Rank(1) << (bits - 1));
    for (;;) {
        Rank r = 0;
        for (unsigned have = 0; have < bits; have += 64) r = (r << 64) | Rank(rng());
        r &= mask;
        if (r <= bound) return r;
    }
}

std::vector<KTuple> sample_colored(const CandidateSet& c, double prob, Rng& rng) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw Error("coloring probability outside [0,1]");
    const Rank size = c.size();
    const std::uint64_t count = draw_count(size, prob, rng);
    std::vector<KTuple> out;
    if (count == 0) return out;
    out.reserve(count);
    if (Rank(count) == size) {
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(c.member(Rank(i)));
        return out;
    }
    // Floyd's algorithm: `count` distinct uniform indices in [0, size)
    std::set<Rank> chosen;
    for (Rank j = size - count; j < size; ++j) {
        Rank t = uniform_rank(rng, j);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    for (const auto& r : chosen) out.push_back(c.member(r));
    return out;
}

UniformSource::UniformSource(std::uint64_t master_seed) {
    key_.lo = simd::mix64(master_seed + 0x5851f42d4c957f2dULL);
    key_.hi = simd::mix64(key_.lo ^ 0x14057b7ef767814fULL);
}

double UniformSource::base_uniform(const KTuple& e) const {
    const Rank rank = tuple_rank(e);
    const Rank low_mask = Rank(std::numeric_limits<std::uint64_t>::max());
    const auto low = static_cast<std::uint64_t>(rank & low_mask);
    Rank high = rank >> 64;
    if (high == 0) return simd::mix_uniform(key_, low);
    std::uint64_t h = simd::mix64(low + key_.lo);
    while (high != 0) {
        h = simd::mix64(h ^ static_cast<std::uint64_t>(high & low_mask));
        high >>= 64;
    }
    h = simd::mix64(h ^ key_.hi);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::optional<double> UniformSource::uniform(const KTuple& e) const {
    auto it = u_.find(e);
    if (it == u_.end()) return std::nullopt;
    return it->second;
}

void UniformSource::materialize(const KTuple& e, double u) { u_.insert_or_assign(e, u); }

double UniformSource::tracked_mass(const KTuple& e) const {
    auto it = s_.find(e);
    return it == s_.end() ? 0.0 : it->second;
}

std::vector<KTuple> coupled_query(QueryLedger& ledger, UniformSource& source, StepKey key, std::uint32_t rep,
                                  CandidateRef c, double prob, std::uint64_t cap, Rng& rng, CouplingMode mode,
                                  const simd::KernelTable& kernels) {
    if (!c) throw Error("null candidate set");
    std::vector<KTuple> hits;
    if (mode == CouplingMode::Eager) {
        if (!(prob >= 0.0 && prob <= 1.0)) throw Error("coloring probability outside [0,1]");
        const auto members = c->members(kMaxEagerMembers);
        const std::size_t m = members.size();
        std::vector<std::uint64_t> ranks(m);
        std::vector<double> uniforms(m), coins(m), mass(m);
        std::vector<std::uint8_t> hit(m);
        bool narrow = true;
        for (std::size_t i = 0; i < m; ++i) {
            const Rank r = tuple_rank(members[i]);
            narrow = narrow && r <= Rank(std::numeric_limits<std::uint64_t>::max());
            ranks[i] = narrow ? r.convert_to<std::uint64_t>() : 0;
            mass[i] = source.tracked_mass(members[i]);
            coins[i] = unit_double(rng);
        }
        if (narrow) {
            kernels.mix_uniforms(source.key(), ranks, uniforms);
        } else {
            for (std::size_t i = 0; i < m; ++i) uniforms[i] = source.base_uniform(members[i]);
        }
        kernels.coupled_step(mass, uniforms, coins, prob, hit);
        for (std::size_t i = 0; i < m; ++i) {
            source.tracked_mass_ref(members[i]) = mass[i];
            if (hit[i]) {
                hits.push_back(members[i]);
                source.materialize(members[i], uniforms[i]);
            }
        }
        ledger.append({key.round, key.step, rep, c, prob, hits}, cap);
        return hits;
    }

    hits = sample_colored(*c, prob, rng);
    ledger.append({key.round, key.step, rep, c, prob, hits}, cap);
    if (mode == CouplingMode::Lazy) {
        const std::size_t upto = ledger.size();
        for (const auto& e : hits) {
            if (source.uniform(e)) continue;  // coin branch: U_e already below S_e
            const double before = replay_mass(ledger, e, upto - 1, kernels);
            const double after = replay_mass(ledger, e, upto, kernels);
            const double u = before + source.base_uniform(e) * (after - before);
            source.materialize(e, std::min(u, after));
        }
    }
    return hits;
}

SprinkleEngine::SprinkleEngine(std::uint64_t seed, CouplingMode mode)
    : seed_(seed), mode_(mode), source_(seed) {}

std::vector<KTuple> SprinkleEngine::query(StepKey key, std::uint32_t rep, CandidateRef c, double prob,
                                          std::uint64_t cap) {
    Rng rng = rng_for(key, rep, Stream::Coloring);
    return coupled_query(ledger_, source_, key, rep, std::move(c), prob, cap, rng, mode_);
}

TrialOutcome SprinkleEngine::run_trials(StepKey key, CandidateRef c, double prob, std::uint64_t cap) {
    if (cap == 0) throw Error("trial cap must be at least 1");
    TrialOutcome out;
    for (std::uint64_t t = 1; t <= cap; ++t) {
        out.repetitions = static_cast<std::uint32_t>(t);
        out.colored = query(key, out.repetitions, c, prob, cap);
        if (!out.colored.empty()) break;
    }
    return out;
}

bool final_embedding_check(const QueryLedger& ledger, const UniformSource& source, double p, KTuple* witness) {
    for (const auto& e : ledger.colored()) {
        const auto u = source.uniform(e);
        if (!u) throw Error("tuple " + e.to_string() + " was colored without coupling state");
        if (*u > p) {
            if (witness) *witness = e;
            return false;
        }
    }
    return true;
}

}  // namespace loosepack
