// loosepack: pack | audit | verify | solve-aux

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loosepack/experiment.hpp"
#include "loosepack/packer.hpp"
#include "loosepack/solver.hpp"
#include "loosepack/verifier.hpp"

namespace {

using namespace loosepack;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop = true; }

// Raw flag values; applied on top of the config file when given.
struct Flags {
    std::string config;
    std::uint64_t n = 0;
    unsigned k = 3;
    double p = 0.0;
    double eps = 0.1;
    std::vector<std::uint64_t> seeds;
    std::uint64_t trials = 0;
    double omega_n = 0, q = 0, r = 0, step1_prob = 0;
    std::uint64_t alpha_n = 0, N = 0, step1_cap = 0, close_cap = 0;
    std::vector<std::uint64_t> A;
    std::uint64_t solver_cap = 0;
    std::string out;
    std::string format = "json";
    std::string mode = "lazy";
    unsigned threads = 1;
    std::size_t mass_sample = 256;
    int verbosity = 0;
};

struct Bound {
    CLI::Option* n{};
    CLI::Option* k{};
    CLI::Option* p{};
    CLI::Option* eps{};
    CLI::Option* seeds{};
    CLI::Option* trials{};
    CLI::Option* omega_n{};
    CLI::Option* q{};
    CLI::Option* alpha_n{};
    CLI::Option* A{};
    CLI::Option* r{};
    CLI::Option* N{};
    CLI::Option* step1_prob{};
    CLI::Option* step1_cap{};
    CLI::Option* close_cap{};
    CLI::Option* desk{};
    CLI::Option* solver_cap{};
    CLI::Option* out{};
    CLI::Option* log_queries{};
    CLI::Option* format{};
    CLI::Option* mode{};
    CLI::Option* threads{};
    CLI::Option* timing{};
    CLI::Option* mass_sample{};
    CLI::Option* verbose{};
};

Bound add_common(CLI::App* app, Flags& f) {
    Bound b;
    app->add_option("--config", f.config, "JSON config mirroring the flags; flags win")->check(CLI::ExistingFile);
    b.n = app->add_option("--n", f.n, "number of vertices");
    b.k = app->add_option("--k", f.k, "uniformity");
    b.p = app->add_option("--p", f.p, "edge probability");
    b.eps = app->add_option("--eps", f.eps, "epsilon in (0, 1/2)");
    b.seeds = app->add_option("--seeds", f.seeds, "seed list")->delimiter(',');
    b.trials = app->add_option("--trials", f.trials, "seeds to run; one seed s expands to s, s+1, ...");
    b.omega_n = app->add_option("--override-omega_n,--override-omega-n", f.omega_n);
    b.q = app->add_option("--override-q", f.q);
    b.alpha_n = app->add_option("--override-alpha_n,--override-alpha-n", f.alpha_n);
    b.A = app->add_option("--override-A", f.A, "one cap for every step, or A_2..A_K")->delimiter(',');
    b.r = app->add_option("--override-r", f.r);
    b.N = app->add_option("--override-N", f.N);
    b.step1_prob = app->add_option("--override-step1_prob,--override-step1-prob", f.step1_prob);
    b.step1_cap = app->add_option("--override-step1_cap,--override-step1-cap", f.step1_cap);
    b.close_cap = app->add_option("--override-close_cap,--override-close-cap", f.close_cap);
    b.desk = app->add_flag("--desk-scale", "allow derived probabilities >= 1 (clipped)");
    b.solver_cap = app->add_option("--solver-cap", f.solver_cap, "closing search node cap, 0 = none");
    b.out = app->add_option("--out", f.out, "output directory");
    b.log_queries = app->add_flag("--log-queries", "write per-seed query ledgers and round outcomes");
    b.format = app->add_option("--format", f.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    b.mode = app->add_option("--mode", f.mode, "coupling mode")->check(CLI::IsMember({"lazy", "eager", "independent"}));
    b.threads = app->add_option("--threads", f.threads, "worker threads");
    b.timing = app->add_flag("--timing", "record wall_ms (summaries stop being byte-stable)");
    b.mass_sample = app->add_option("--mass-sample", f.mass_sample, "untouched tuples sampled by verify_mass");
    b.verbose = app->add_flag("-v,--verbose", f.verbosity, "progress on stderr");
    return b;
}

ExperimentConfig build_config(const Flags& f, const Bound& b) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        std::ifstream is(f.config);
        if (!is) throw Error("cannot read " + f.config);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(is);
        } catch (const nlohmann::json::exception& e) {
            throw ParamError("config", f.config + ": " + e.what());
        }
        apply_config_json(cfg, j);
    }
    nlohmann::json flags = nlohmann::json::object();
    if (b.n->count()) flags["n"] = f.n;
    if (b.k->count()) flags["k"] = f.k;
    if (b.p->count()) flags["p"] = f.p;
    if (b.eps->count()) flags["eps"] = f.eps;
    if (b.seeds->count()) flags["seeds"] = f.seeds;
    if (b.trials->count()) flags["trials"] = f.trials;
    if (b.omega_n->count()) flags["override-omega_n"] = f.omega_n;
    if (b.q->count()) flags["override-q"] = f.q;
    if (b.alpha_n->count()) flags["override-alpha_n"] = f.alpha_n;
    if (b.A->count()) flags["override-A"] = f.A;
    if (b.r->count()) flags["override-r"] = f.r;
    if (b.N->count()) flags["override-N"] = f.N;
    if (b.step1_prob->count()) flags["override-step1_prob"] = f.step1_prob;
    if (b.step1_cap->count()) flags["override-step1_cap"] = f.step1_cap;
    if (b.close_cap->count()) flags["override-close_cap"] = f.close_cap;
    if (b.desk->count()) flags["desk_scale"] = true;
    if (b.solver_cap->count()) flags["solver_cap"] = f.solver_cap;
    if (b.out->count()) flags["out"] = f.out;
    if (b.log_queries->count()) flags["log_queries"] = true;
    if (b.format->count()) flags["format"] = f.format;
    if (b.mode->count()) flags["mode"] = f.mode;
    if (b.threads->count()) flags["threads"] = f.threads;
    if (b.timing->count()) flags["timing"] = true;
    if (b.mass_sample->count()) flags["mass_sample"] = f.mass_sample;
    if (b.verbose->count()) flags["verbosity"] = f.verbosity;
    apply_config_json(cfg, flags);
    return cfg;
}

int cmd_pack(const ExperimentConfig& cfg) {
    const ExperimentSummary s = run_experiment(cfg, &g_stop);
    if (!cfg.out.empty()) {
        for (const auto& path : emit(s, cfg.format, cfg.out)) std::cerr << "wrote " << path.string() << '\n';
    } else if (cfg.format == "csv") {
        std::cout << to_csv(s);
    } else {
        std::cout << to_json(s).dump(2) << '\n';
    }
    for (const auto& r : s.rows) {
        std::cerr << "seed " << r.seed << ": " << r.cycles_found << "/" << r.N << " cycles, " << r.collisions
                  << " collisions, max Q_e " << r.max_Qe << '\n';
    }
    return s.interrupted ? 130 : 0;
}

int cmd_audit(const ExperimentConfig& cfg) {
    const Params P = derive_params(cfg.n, cfg.k, cfg.p, cfg.epsilon, cfg.overrides, cfg.desk_scale);
    const AuditReport a = audit_params(P);
    nlohmann::json j = {{"params", to_json(P)}, {"audit", to_json(a)}, {"mcdiarmid", to_json(mcdiarmid_instance(P))}};
    const RegimeSplit split = split_regime(cfg.n, cfg.k, cfg.p);
    j["split"] = {{"M", split.M}, {"p_slice", split.p_slice}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const std::string& queries) {
    cfg.validate();
    const Params P = derive_params(cfg.n, cfg.k, cfg.p, cfg.epsilon, cfg.overrides, cfg.desk_scale);
    PackOptions opts;
    opts.solver_cap = cfg.solver_cap;
    opts.mode = cfg.mode;
    bool clean = true;
    for (auto seed : cfg.effective_seeds()) {
        if (g_stop) return 130;
        const PackResult run = pack(P, seed, opts);
        MassPlan plan;
        plan.sample_size = cfg.mass_sample;
        plan.seed = seed;
        const VerificationReport rep = verify_run(run, P, plan);
        nlohmann::json j = {{"seed", seed}, {"report", to_json(rep)}};
        if (!queries.empty()) {
            std::ifstream is(queries);
            if (!is) throw Error("cannot read " + queries);
            j["ledger_matches_log"] = QueryLedger::read_jsonl(is) == run.engine.ledger();
        }
        std::cout << j.dump() << '\n';
        clean = clean && rep.packing.invalid.empty() && rep.embedding.ok;
        std::cerr << "seed " << seed << ": " << rep.packing.valid << "/" << rep.packing.cycles << " valid, "
                  << rep.packing.collision_pairs << " collisions, max Q_e " << rep.mass.max_q << ", embedding "
                  << (rep.embedding.ok ? "ok" : "FAILED") << '\n';
    }
    return clean ? 0 : 3;
}

int cmd_solve(const std::string& path, std::uint64_t seed, bool brute, std::optional<std::uint64_t> cap) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    AuxInstance inst = aux_from_json(nlohmann::json::parse(is));
    if (cap) inst.node_cap = *cap;
    std::mt19937_64 rng(derive_seed(seed, 0, 0, 0, Stream::Solver));
    nlohmann::json j = {{"result", to_json(find_constrained_hc(inst, rng))}};
    if (brute) {
        const auto bf = brute_force_hc(inst);
        j["brute_force"] = {{"count", bf.count}, {"result", to_json(bf.result)}};
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packing loose Hamilton cycles by online sprinkling"};
    app.require_subcommand(1);

    Flags pf, af, vf;
    auto* pack_cmd = app.add_subcommand("pack", "run rounds for each seed and summarize");
    const Bound pb = add_common(pack_cmd, pf);
    auto* audit_cmd = app.add_subcommand("audit", "derive parameters and print closed-form bounds");
    const Bound ab = add_common(audit_cmd, af);
    auto* verify_cmd = app.add_subcommand("verify", "re-run seeds and print verification reports");
    const Bound vb = add_common(verify_cmd, vf);
    std::string queries;
    verify_cmd->add_option("--queries", queries, "query log to compare against the re-run")->check(CLI::ExistingFile);

    auto* solve_cmd = app.add_subcommand("solve-aux", "solve a closing instance from JSON");
    std::string instance;
    std::uint64_t solve_seed = 1;
    std::uint64_t solve_cap = 0;
    solve_cmd->add_option("instance", instance, "AuxInstance JSON file")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--seed", solve_seed, "solver seed");
    auto* cap_opt = solve_cmd->add_option("--solver-cap", solve_cap, "node cap, 0 = none");
    auto* brute_opt = solve_cmd->add_flag("--brute", "also run the exhaustive oracle");

    CLI11_PARSE(app, argc, argv);
    std::signal(SIGINT, on_sigint);

    try {
        if (*pack_cmd) return cmd_pack(build_config(pf, pb));
        if (*audit_cmd) return cmd_audit(build_config(af, ab));
        if (*verify_cmd) return cmd_verify(build_config(vf, vb), queries);
        if (*solve_cmd) {
            return cmd_solve(instance, solve_seed, brute_opt->count() > 0,
                             cap_opt->count() ? std::optional<std::uint64_t>(solve_cap) : std::nullopt);
        }
    } catch (const ParamError& e) {
        std::cerr << "invalid parameter " << e.field() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
