#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "loosepack/experiment.hpp"

using namespace loosepack;

namespace {

ExperimentConfig desk_config(std::uint64_t n, unsigned k, std::uint64_t alpha) {
    ExperimentConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.p = 0.1;
    cfg.overrides.omega_n = 30;
    cfg.overrides.q = 0.3;
    cfg.overrides.r = 0.5;
    cfg.overrides.step1_prob = 0.05;
    cfg.overrides.alpha_n = alpha;
    cfg.overrides.N = 10;
    cfg.mass_sample = 32;
    return cfg;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("effective seeds") {
    ExperimentConfig cfg;
    cfg.seeds = {5};
    cfg.trials = 3;
    CHECK(cfg.effective_seeds() == std::vector<std::uint64_t>{5, 6, 7});
    cfg.trials = 0;
    CHECK(cfg.effective_seeds().empty());
    cfg.trials.reset();
    cfg.seeds = {3, 1, 2};
    CHECK(cfg.effective_seeds() == std::vector<std::uint64_t>{3, 1, 2});
}

TEST_CASE("zero trials give an empty summary") {
    ExperimentConfig cfg = desk_config(12, 3, 7);
    cfg.trials = 0;
    const auto s = run_experiment(cfg);
    CHECK(s.rows.empty());
    CHECK_FALSE(s.interrupted);
    CHECK(to_csv(s) == std::string(kCsvHeader) + "\n");
    CHECK(to_json(s).at("rows").empty());
}

TEST_CASE("summaries are byte-identical across runs and thread counts") {
    ExperimentConfig cfg = desk_config(24, 3, 7);
    cfg.seeds = {1};
    cfg.trials = 6;
    const auto a = run_experiment(cfg);
    cfg.threads = 3;
    const auto b = run_experiment(cfg);
    CHECK(a.rows == b.rows);
    REQUIRE(a.rows.size() == 6);
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].seed == i + 1);
    const auto ja = to_json(a), jb = to_json(b);
    CHECK(ja.at("rows").dump() == jb.at("rows").dump());
    CHECK(to_csv(a) == to_csv(b));
    for (const auto& r : a.rows) {
        CHECK(r.wall_ms == 0.0);
        CHECK(r.invalid_cycles == 0);
        CHECK(r.cycles_found + r.fail_step1 + r.fail_mid + r.fail_close == r.N);
    }
}

TEST_CASE("csv and json agree") {
    ExperimentConfig cfg = desk_config(15, 4, 11);
    cfg.seeds = {4, 9};
    const auto s = run_experiment(cfg);
    const auto lines = split(to_csv(s), '\n');
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == kCsvHeader);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cols = split(lines[i], ',');
        REQUIRE(cols.size() == 12);
        const auto& r = s.rows[i - 1];
        CHECK(std::stoull(cols[0]) == r.seed);
        CHECK(std::stoull(cols[4]) == r.N);
        CHECK(std::stoull(cols[5]) == r.cycles_found);
        CHECK(std::stoull(cols[9]) == r.collisions);
        CHECK(std::stod(cols[10]) == r.max_Qe);
    }
    const auto j = to_json(s);
    for (std::size_t i = 0; i < s.rows.size(); ++i) CHECK(seed_row_from_json(j.at("rows")[i]) == s.rows[i]);
}

TEST_CASE("aggregates") {
    ExperimentSummary s;
    SeedRow a, b;
    a.cycles_found = 4;
    b.cycles_found = 6;
    s.rows = {a, b};
    const auto agg = s.aggregates();
    CHECK(agg.at("cycles_found").mean == doctest::Approx(5.0));
    CHECK(agg.at("cycles_found").stderr_ == doctest::Approx(1.0));
}

TEST_CASE("config json") {
    const auto cfg = config_from_json(nlohmann::json::parse(R"({
        "n": 24, "k": 3, "p": 0.1, "eps": 0.2, "seeds": [3, 4], "mode": "eager",
        "overrides": {"omega_n": 30, "alpha_n": 7, "q": 0.3, "r": 0.5}, "override-N": 5
    })"));
    CHECK(cfg.n == 24);
    CHECK(cfg.epsilon == 0.2);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.mode == CouplingMode::Eager);
    CHECK(cfg.overrides.alpha_n == 7u);
    CHECK(cfg.overrides.N == 5u);
    CHECK_NOTHROW(cfg.validate());
    CHECK(config_from_json(to_json(cfg)).overrides.N == 5u);

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n", 24}, {"bogus", 1}}), ParamError);
    ExperimentConfig bad = cfg;
    bad.n = 22;
    bad.k = 4;
    CHECK_THROWS_AS(bad.validate(), ParamError);
}

TEST_CASE("emit and query logs") {
    const auto dir = std::filesystem::temp_directory_path() / "loosepack_test_experiment";
    std::filesystem::remove_all(dir);
    ExperimentConfig cfg = desk_config(12, 3, 7);
    cfg.seeds = {2};
    cfg.out = dir;
    cfg.log_queries = true;
    const auto s = run_experiment(cfg);
    const auto paths = emit(s, "both", dir);
    CHECK(paths.size() == 2);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "queries_2.jsonl"));
    CHECK(std::filesystem::exists(dir / "rounds_2.jsonl"));
    const auto first = slurp(dir / "summary.json");
    const auto queries = slurp(dir / "queries_2.jsonl");
    run_experiment(cfg);
    emit(s, "both", dir);
    CHECK(slurp(dir / "summary.json") == first);
    CHECK(slurp(dir / "queries_2.jsonl") == queries);
    std::filesystem::remove_all(dir);
}

TEST_CASE("interrupt keeps completed rows") {
    ExperimentConfig cfg = desk_config(12, 3, 7);
    cfg.trials = 5;
    std::atomic<bool> stop{true};
    const auto s = run_experiment(cfg, &stop);
    CHECK(s.interrupted);
    CHECK(s.rows.size() < 5);
}
