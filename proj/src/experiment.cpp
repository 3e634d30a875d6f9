#include "loosepack/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "loosepack/packer.hpp"
#include "loosepack/verifier.hpp"

namespace loosepack {
namespace {

std::string mode_name(CouplingMode m) {
    switch (m) {
        case CouplingMode::Independent: return "independent";
        case CouplingMode::Lazy: return "lazy";
        case CouplingMode::Eager: return "eager";
    }
    return "?";
}

CouplingMode mode_from(const std::string& s) {
    if (s == "independent") return CouplingMode::Independent;
    if (s == "lazy") return CouplingMode::Lazy;
    if (s == "eager") return CouplingMode::Eager;
    throw ParamError("mode", "expected independent, lazy or eager, got " + s);
}

std::string fmt(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
    os.close();
    if (!os) throw Error("write failed: " + path.string());
}

SeedRow run_seed(const ExperimentConfig& cfg, const Params& P, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    PackOptions opts;
    opts.mode = cfg.mode;
    opts.solver_cap = cfg.solver_cap;
    const PackResult run = pack(P, seed, opts);
    MassPlan plan;
    plan.sample_size = cfg.mass_sample;
    plan.seed = seed;
    const VerificationReport rep = verify_run(run, P, plan);

    SeedRow row;
    row.seed = seed;
    row.n = P.n;
    row.k = P.k;
    row.p = P.p;
    row.N = P.N;
    row.cycles_found = run.cycles.size();
    for (const auto& o : run.outcomes) {
        if (!o.failure) continue;
        const auto step = o.failure->step;
        if (step == 1) {
            ++row.fail_step1;
        } else if (step <= P.K) {
            ++row.fail_mid;
        } else {
            ++row.fail_close;
        }
        ++row.failures[std::to_string(step) + ":" + std::string(to_string(o.failure->cause))];
    }
    row.collisions = rep.packing.collision_pairs;
    row.max_Qe = rep.mass.max_q;
    row.invalid_cycles = rep.packing.invalid.size();
    row.qe_violations = rep.mass.violations.size();
    row.embedding_ok = rep.embedding.ok;
    row.accounting_violations = rep.accounting_violations;
    row.collision_estimate = rep.audit.collision_estimate;

    if (cfg.log_queries && !cfg.out.empty()) {
        const auto tag = std::to_string(seed);
        const auto qpath = cfg.out / ("queries_" + tag + ".jsonl");
        auto qs = open_out(qpath);
        run.engine.ledger().write_jsonl(qs);
        close_out(qs, qpath);
        const auto rpath = cfg.out / ("rounds_" + tag + ".jsonl");
        auto rs = open_out(rpath);
        write_outcomes_jsonl(rs, run.outcomes);
        close_out(rs, rpath);
        const auto vpath = cfg.out / ("verify_" + tag + ".json");
        auto vs = open_out(vpath);
        vs << to_json(rep).dump(2) << '\n';
        close_out(vs, vpath);
    }
    if (cfg.timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return row;
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
    if (!trials) return seeds;
    if (seeds.size() == 1) {
        std::vector<std::uint64_t> out;
        for (std::uint64_t t = 0; t < *trials; ++t) out.push_back(seeds[0] + t);
        return out;
    }
    return {seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(*trials, seeds.size()))};
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ParamError("seeds", "at least one seed required");
    if (trials && seeds.size() > 1 && *trials > seeds.size()) {
        throw ParamError("trials", "exceeds the explicit seed list");
    }
    if (format != "json" && format != "csv" && format != "both") {
        throw ParamError("format", "expected json, csv or both, got " + format);
    }
    if (threads == 0) throw ParamError("threads", "must be at least 1");
    derive_params(n, k, p, epsilon, overrides, desk_scale);
}

void apply_config_json(ExperimentConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw ParamError("config", "expected a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n") {
                c.n = v.get<std::uint64_t>();
            } else if (key == "k") {
                c.k = v.get<unsigned>();
            } else if (key == "p") {
                c.p = v.get<double>();
            } else if (key == "eps" || key == "epsilon") {
                c.epsilon = v.get<double>();
            } else if (key == "seeds") {
                c.seeds = v.is_array() ? v.get<std::vector<std::uint64_t>>()
                                       : std::vector<std::uint64_t>{v.get<std::uint64_t>()};
            } else if (key == "trials") {
                c.trials = v.get<std::uint64_t>();
            } else if (key == "overrides") {
                const Overrides o = overrides_from_json(v);
                nlohmann::json merged = to_json(c.overrides);
                merged.update(to_json(o));
                c.overrides = overrides_from_json(merged);
            } else if (key.rfind("override-", 0) == 0) {
                nlohmann::json merged = to_json(c.overrides);
                merged[key.substr(9)] = v;
                c.overrides = overrides_from_json(merged);
            } else if (key == "desk_scale" || key == "desk-scale") {
                c.desk_scale = v.get<bool>();
            } else if (key == "solver_cap" || key == "solver-cap") {
                c.solver_cap = v.get<std::uint64_t>();
            } else if (key == "mode") {
                c.mode = mode_from(v.get<std::string>());
            } else if (key == "mass_sample" || key == "mass-sample") {
                c.mass_sample = v.get<std::size_t>();
            } else if (key == "out") {
                c.out = v.get<std::string>();
            } else if (key == "log_queries" || key == "log-queries") {
                c.log_queries = v.get<bool>();
            } else if (key == "format") {
                c.format = v.get<std::string>();
            } else if (key == "threads") {
                c.threads = v.get<unsigned>();
            } else if (key == "timing") {
                c.timing = v.get<bool>();
            } else if (key == "verbosity") {
                c.verbosity = v.get<int>();
            } else {
                throw ParamError(key, "unknown config key");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParamError("config", e.what());
    }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    apply_config_json(c, j);
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j = {
        {"n", c.n},
        {"k", c.k},
        {"p", c.p},
        {"eps", c.epsilon},
        {"seeds", c.seeds},
        {"overrides", to_json(c.overrides)},
        {"desk_scale", c.desk_scale},
        {"solver_cap", c.solver_cap},
        {"mode", mode_name(c.mode)},
        {"mass_sample", c.mass_sample},
        {"format", c.format},
        {"timing", c.timing},
    };
    if (c.trials) j["trials"] = *c.trials;
    return j;
}

std::map<std::string, Aggregate> ExperimentSummary::aggregates() const {
    std::map<std::string, std::vector<double>> cols;
    for (const auto& r : rows) {
        cols["cycles_found"].push_back(static_cast<double>(r.cycles_found));
        if (r.N > 0) {
            cols["success_fraction"].push_back(static_cast<double>(r.cycles_found) / static_cast<double>(r.N));
        }
        cols["collisions"].push_back(static_cast<double>(r.collisions));
        cols["max_Qe"].push_back(r.max_Qe);
        cols["wall_ms"].push_back(r.wall_ms);
    }
    std::map<std::string, Aggregate> out;
    for (const auto& [name, xs] : cols) {
        const double m = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= m;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        out[name] = {mean, xs.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0};
    }
    return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::atomic<bool>* stop) {
    cfg.validate();
    const Params P = derive_params(cfg.n, cfg.k, cfg.p, cfg.epsilon, cfg.overrides, cfg.desk_scale);
    ExperimentSummary s;
    s.config = to_json(cfg);
    s.params = to_json(P);
    s.audit = to_json(audit_params(P));

    const auto seeds = cfg.effective_seeds();
    if (!cfg.out.empty()) std::filesystem::create_directories(cfg.out);
    std::vector<std::optional<SeedRow>> rows(seeds.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> halted{false};
    std::exception_ptr error;
    std::mutex mu;

    auto worker = [&] {
        for (;;) {
            if (stop && stop->load()) {
                halted = true;
                return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                rows[i] = run_seed(cfg, P, seeds[i]);
                if (cfg.verbosity > 0) {
                    std::lock_guard lock(mu);
                    std::clog << "seed " << seeds[i] << ": " << rows[i]->cycles_found << "/" << P.N << " cycles\n";
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                halted = true;
                return;
            }
        }
    };
    const unsigned nthreads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cfg.threads, seeds.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (auto& r : rows) {
        if (r) s.rows.push_back(std::move(*r));
    }
    std::sort(s.rows.begin(), s.rows.end(), [](const SeedRow& a, const SeedRow& b) { return a.seed < b.seed; });
    s.interrupted = halted.load() || s.rows.size() != seeds.size();
    return s;
}

nlohmann::json to_json(const SeedRow& r) {
    return {
        {"seed", r.seed},
        {"n", r.n},
        {"k", r.k},
        {"p", r.p},
        {"N", r.N},
        {"cycles_found", r.cycles_found},
        {"fail_step1", r.fail_step1},
        {"fail_mid", r.fail_mid},
        {"fail_close", r.fail_close},
        {"collisions", r.collisions},
        {"max_Qe", r.max_Qe},
        {"wall_ms", r.wall_ms},
        {"failures", r.failures},
        {"invalid_cycles", r.invalid_cycles},
        {"qe_violations", r.qe_violations},
        {"embedding_ok", r.embedding_ok},
        {"accounting_violations", r.accounting_violations},
        {"collision_estimate", r.collision_estimate},
    };
}

SeedRow seed_row_from_json(const nlohmann::json& j) {
    SeedRow r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::uint64_t>();
    r.k = j.at("k").get<unsigned>();
    r.p = j.at("p").get<double>();
    r.N = j.at("N").get<std::uint64_t>();
    r.cycles_found = j.at("cycles_found").get<std::uint64_t>();
    r.fail_step1 = j.at("fail_step1").get<std::uint64_t>();
    r.fail_mid = j.at("fail_mid").get<std::uint64_t>();
    r.fail_close = j.at("fail_close").get<std::uint64_t>();
    r.collisions = j.at("collisions").get<std::uint64_t>();
    r.max_Qe = j.at("max_Qe").get<double>();
    r.wall_ms = j.at("wall_ms").get<double>();
    if (j.contains("failures")) r.failures = j.at("failures").get<std::map<std::string, std::uint64_t>>();
    if (j.contains("invalid_cycles")) r.invalid_cycles = j.at("invalid_cycles").get<std::uint64_t>();
    if (j.contains("qe_violations")) r.qe_violations = j.at("qe_violations").get<std::uint64_t>();
    if (j.contains("embedding_ok")) r.embedding_ok = j.at("embedding_ok").get<bool>();
    if (j.contains("accounting_violations")) {
        r.accounting_violations = j.at("accounting_violations").get<std::uint64_t>();
    }
    if (j.contains("collision_estimate")) r.collision_estimate = j.at("collision_estimate").get<double>();
    return r;
}

nlohmann::json to_json(const ExperimentSummary& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) rows.push_back(to_json(r));
    nlohmann::json agg = nlohmann::json::object();
    for (const auto& [name, a] : s.aggregates()) agg[name] = {{"mean", a.mean}, {"stderr", a.stderr_}};
    return {{"config", s.config}, {"params", s.params}, {"audit", s.audit},
            {"rows", rows},       {"aggregates", agg},  {"interrupted", s.interrupted}};
}

std::string to_csv(const ExperimentSummary& s) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : s.rows) {
        os << r.seed << ',' << r.n << ',' << r.k << ',' << fmt(r.p) << ',' << r.N << ',' << r.cycles_found << ','
           << r.fail_step1 << ',' << r.fail_mid << ',' << r.fail_close << ',' << r.collisions << ','
           << fmt(r.max_Qe) << ',' << fmt(r.wall_ms) << '\n';
    }
    return os.str();
}

std::vector<std::filesystem::path> emit(const ExperimentSummary& s, const std::string& format,
                                        const std::filesystem::path& dir) {
    if (format != "json" && format != "csv" && format != "both") {
        throw ParamError("format", "expected json, csv or both, got " + format);
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> out;
    if (format == "json" || format == "both") {
        const auto path = dir / "summary.json";
        auto os = open_out(path);
        os << to_json(s).dump(2) << '\n';
        close_out(os, path);
        out.push_back(path);
    }
    if (format == "csv" || format == "both") {
        const auto path = dir / "summary.csv";
        auto os = open_out(path);
        os << to_csv(s);
        close_out(os, path);
        out.push_back(path);
    }
    return out;
}

}  // namespace loosepack
