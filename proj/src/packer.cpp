#include "loosepack/packer.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>
#include <string>

namespace loosepack {
namespace {

template <class T>
const T& pick(const std::vector<T>& xs, Rng& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, xs.size() - 1);
    return xs[dist(rng)];
}

void check_path(const LoosePath& path, std::uint32_t j, unsigned k) {
    const auto v = validate_loose_path(path);
    if (!v || path.edge_count() != j || path.order.size() != j * (k - 1) + 1) {
        throw Error("path invariant broken after step " + std::to_string(j) + ": " + v.detail);
    }
}

}  // namespace

std::string_view to_string(FailCause c) noexcept {
    switch (c) {
        case FailCause::NoColor: return "NO_COLOR";
        case FailCause::NoCycle: return "NO_CYCLE";
        case FailCause::SolverCap: return "SOLVER_CAP";
    }
    return "?";
}

AuxInstance build_aux(const std::vector<Vertex>& free, Vertex a, Vertex b, std::uint64_t n, unsigned k,
                      const std::vector<KTuple>& colored) {
    AuxInstance inst;
    inst.k = k;
    inst.v0 = static_cast<Vertex>(n);
    inst.vertices = free;
    inst.vertices.push_back(inst.v0);
    std::map<KTuple, std::uint8_t> tags;
    for (const auto& e : colored) {
        if (e.contains(a)) {
            tags[e.without(a).with(inst.v0)] |= kTagA;
        } else if (e.contains(b)) {
            tags[e.without(b).with(inst.v0)] |= kTagB;
        } else {
            tags[e] |= kTagPlain;
        }
    }
    for (const auto& [e, t] : tags) inst.edges.push_back({e, t});
    return inst;
}

std::optional<LooseCycle> close_round(std::uint32_t i, const LoosePath& path, const Params& P,
                                      SprinkleEngine& engine, const PackOptions& opts, SolverStats& stats,
                                      FailCause& cause) {
    const unsigned k = P.k;
    const Vertex a = path.order.front();
    const Vertex b = path.order.back();
    std::vector<char> on_path(P.n, 0);
    for (auto v : path.order) on_path[v] = 1;
    std::vector<Vertex> free;
    for (Vertex v = 0; v < P.n; ++v) {
        if (!on_path[v]) free.push_back(v);
    }
    if (free.size() != P.alpha_n) throw Error("closing step expects alpha_n free vertices");

    const auto step = static_cast<std::uint32_t>(P.K + 1);
    const auto c = std::make_shared<const CandidateSet>(CandidateSet::closing(P.n, k, free, a, b));
    const bool degenerate = (free.size() + 1) % (k - 1) != 0 || (free.size() + 1) / (k - 1) < 3;
    bool any_colored = false;
    for (std::uint32_t t = 1; t <= P.close_cap; ++t) {
        stats.attempts = t;
        const auto colored = engine.query({i, step}, t, c, P.r, P.close_cap);
        if (colored.empty()) continue;
        any_colored = true;
        AuxInstance inst = build_aux(free, a, b, P.n, k, colored);
        inst.node_cap = opts.solver_cap;
        stats.aux_edges = inst.edges.size();
        Rng rng = engine.rng_for({i, step}, t, Stream::Solver);
        const SolverResult res = find_constrained_hc(inst, rng);
        stats.nodes += res.nodes;
        if (res.outcome == SolverOutcome::CapExceeded) ++stats.cap_hits;
        if (!res.found()) continue;

        const KTuple a_pre = res.a_edge.without(inst.v0).with(a);
        const KTuple b_pre = res.b_edge.without(inst.v0).with(b);
        const auto hit = [&](const KTuple& e) { return std::find(colored.begin(), colored.end(), e) != colored.end(); };
        if (!hit(a_pre) || !hit(b_pre)) throw Error("closing edges lack a colored preimage");

        LooseCycle cycle{path.order, k};
        cycle.order.insert(cycle.order.end(), res.cycle.order.rbegin(), res.cycle.order.rend() - 1);
        const auto v = validate_loose_cycle(cycle, P.n);
        if (!v) throw Error("closed round " + std::to_string(i) + " is not a loose cycle: " + v.detail);
        return cycle;
    }
    if (stats.cap_hits > 0) {
        cause = FailCause::SolverCap;
    } else if (degenerate || any_colored) {
        cause = FailCause::NoCycle;
    } else {
        cause = FailCause::NoColor;
    }
    return std::nullopt;
}

RoundOutcome run_round(std::uint32_t i, const Params& P, SprinkleEngine& engine, const PackOptions& opts) {
    RoundOutcome out;
    out.round = i;
    out.path.k = P.k;
    const unsigned k = P.k;

    // step 1
    {
        if (P.step1_cap == 0) {
            out.T.push_back(0);
            out.failure = StepFailure{1, FailCause::NoColor};
            return out;
        }
        const auto all = std::make_shared<const CandidateSet>(CandidateSet::all(P.n, k));
        const auto trial = engine.run_trials({i, 1}, all, P.step1_prob, P.step1_cap);
        out.T.push_back(trial.repetitions);
        if (trial.failed()) {
            out.failure = StepFailure{1, FailCause::NoColor};
            return out;
        }
        Rng rng = engine.rng_for({i, 1}, 0, Stream::Choice);
        const KTuple& e = pick(trial.colored, rng);
        out.path.order.assign(e.begin(), e.end());
        std::shuffle(out.path.order.begin(), out.path.order.end(), rng);
        check_path(out.path, 1, k);
    }

    // steps 2..K
    std::vector<Vertex> used(out.path.order.begin(), out.path.order.end());
    for (std::uint64_t j = 2; j <= P.K; ++j) {
        const auto step = static_cast<std::uint32_t>(j);
        const std::uint64_t cap = P.cap_for_step(j);
        const Vertex anchor = out.path.order.back();
        std::vector<Vertex> forbidden;
        for (auto v : used) {
            if (v != anchor) forbidden.push_back(v);
        }
        std::sort(forbidden.begin(), forbidden.end());
        const auto ext = std::make_shared<const CandidateSet>(CandidateSet::extend(P.n, k, anchor, forbidden));
        const auto trial = cap == 0 ? TrialOutcome{} : engine.run_trials({i, step}, ext, P.q, cap);
        out.T.push_back(trial.repetitions);
        if (trial.failed()) {
            out.failure = StepFailure{step, FailCause::NoColor};
            return out;
        }
        Rng rng = engine.rng_for({i, step}, 0, Stream::Choice);
        const KTuple& e = pick(trial.colored, rng);
        if (!e.contains(anchor)) throw Error("step " + std::to_string(j) + " colored a tuple without the anchor");
        for (auto v : e) {
            if (v != anchor && std::binary_search(forbidden.begin(), forbidden.end(), v)) {
                throw Error("step " + std::to_string(j) + " colored a tuple through a used vertex");
            }
        }
        std::vector<Vertex> fresh;
        for (auto v : e) {
            if (v != anchor) fresh.push_back(v);
        }
        std::shuffle(fresh.begin(), fresh.end(), rng);
        out.path.order.insert(out.path.order.end(), fresh.begin(), fresh.end());
        used.insert(used.end(), fresh.begin(), fresh.end());
        check_path(out.path, step, k);
    }

    // step K+1
    FailCause cause = FailCause::NoColor;
    if (P.close_cap == 0) {
        out.T.push_back(0);
        out.failure = StepFailure{static_cast<std::uint32_t>(P.K + 1), cause};
        return out;
    }
    auto cycle = close_round(i, out.path, P, engine, opts, out.solver, cause);
    out.T.push_back(out.solver.attempts);
    if (cycle) {
        out.cycle = std::move(*cycle);
    } else {
        out.failure = StepFailure{static_cast<std::uint32_t>(P.K + 1), cause};
    }
    return out;
}

PackResult pack(const Params& P, std::uint64_t seed, const PackOptions& opts) {
    PackResult res{{}, {}, SprinkleEngine(seed, opts.mode)};
    for (std::uint64_t i = 1; i <= P.N; ++i) {
        auto o = run_round(static_cast<std::uint32_t>(i), P, res.engine, opts);
        if (o.cycle) res.cycles.push_back(*o.cycle);
        res.outcomes.push_back(std::move(o));
    }
    return res;
}

SlicedPack pack_slices(std::uint64_t n, unsigned k, double p, double epsilon, const Overrides& overrides,
                       bool desk_scale, std::uint64_t seed, const PackOptions& opts) {
    SlicedPack out;
    out.split = split_regime(n, k, p);
    const Params P = derive_params(n, k, out.split.p_slice, epsilon, overrides, desk_scale);
    for (std::uint64_t s = 0; s < out.split.M; ++s) {
        const std::uint64_t sub = out.split.M == 1
                                      ? seed
                                      : derive_seed(seed, 0, 0, static_cast<std::uint32_t>(s), Stream::Sample);
        out.slices.push_back(pack(P, sub, opts));
        const auto& got = out.slices.back().cycles;
        out.cycles.insert(out.cycles.end(), got.begin(), got.end());
    }
    return out;
}

nlohmann::json to_json(const RoundOutcome& o) {
    nlohmann::json j = {
        {"round", o.round},
        {"status", o.success() ? "success" : "failed"},
        {"T", o.T},
        {"solver",
         {{"attempts", o.solver.attempts},
          {"cap_hits", o.solver.cap_hits},
          {"nodes", o.solver.nodes},
          {"aux_edges", o.solver.aux_edges}}},
    };
    if (o.cycle) j["cycle"] = cycle_to_json(*o.cycle);
    if (o.failure) {
        j["step"] = o.failure->step;
        j["cause"] = std::string(to_string(o.failure->cause));
    }
    return j;
}

void write_outcomes_jsonl(std::ostream& os, const std::vector<RoundOutcome>& outcomes) {
    for (const auto& o : outcomes) os << to_json(o).dump() << '\n';
}

}  // namespace loosepack
