#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqtail/outputs.hpp"
#include "pqtail/pqtail.hpp"

using namespace pqtail;
namespace fs = std::filesystem;

namespace {

ExperimentConfig mm1_config(const std::string& outdir) {
    ExperimentConfig cfg;
    cfg.model = {{0.5}, {1.0}};
    cfg.targets = {SlaTarget{1, 0.9, 6.0}};
    cfg.m1 = cfg.m2 = 600;
    cfg.batches = 30;
    cfg.ce.cycles_per_iteration = 2000;
    cfg.seed = 7;
    cfg.output.dir = outdir;
    cfg.replications = 3;
    validate(cfg);
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("config parsing round trip") {
    nlohmann::json j = {
        {"model", {{"lambda", {0.2, 0.4}}, {"mu", {2.0, 1.0}}}},
        {"targets",
         {{{"class", 1}, {"p", 0.99}, {"gamma_max", 12.5}},
          {{"class", 2}, {"p", 0.999}, {"gamma_max", "auto"}}}},
        {"cycles", {{"m1", 900}, {"m2", 300}}},
        {"ce", {{"cycles_per_iteration", 500}, {"elite_fraction", 0.2}, {"smoothing", 0.8}}},
        {"baseline",
         {{"kind", "static_tilt"}, {"lambda_tilde", {0.3, 0.5}}, {"mu_tilde", {1.5, 0.9}}}},
        {"seed", 99},
        {"workers", 4},
        {"batches", 30},
        {"replications", 5},
        {"reference", {{"1", 8.524}, {"2", 11.541}}},
        {"blocking", {{"gamma", 6.913}, {"cycles", 5000}}},
        {"sla", {{"relative_error", 0.01}, {"presim_cycles", 900}}},
        {"output", {{"dir", "results"}, {"format", "csv"}, {"emit_timings", true}}},
    };
    ExperimentConfig cfg = parse_config(j);
    validate(cfg);
    CHECK(cfg.model.lambda == std::vector<double>{0.2, 0.4});
    REQUIRE(cfg.targets.size() == 2);
    CHECK(cfg.targets[0].gamma_max == 12.5);
    CHECK_FALSE(cfg.targets[1].gamma_max.has_value());
    CHECK(cfg.m1 == 900);
    CHECK(cfg.m2 == 300);
    CHECK(cfg.ce.cycles_per_iteration == 500);
    CHECK(cfg.ce.elite_fraction == 0.2);
    CHECK(cfg.ce.smoothing == 0.8);
    CHECK(cfg.baseline.kind == BaselineKind::static_tilt);
    CHECK(cfg.seed == 99);
    CHECK(cfg.workers == 4);
    CHECK(cfg.replications == 5);
    CHECK(cfg.reference.at(1) == 8.524);
    CHECK(cfg.blocking.gamma == 6.913);
    CHECK(cfg.sla.target_relative_error == 0.01);
    CHECK(cfg.output.format == "csv");
    CHECK(cfg.output.emit_timings);
}

TEST_CASE("config defaults and errors") {
    nlohmann::json minimal = {{"model", {{"lambda", {0.5}}, {"mu", {1.0}}}}};
    ExperimentConfig cfg = parse_config(minimal);
    REQUIRE(cfg.targets.size() == 1); // one default target per class
    CHECK(cfg.targets[0].p == 0.999);
    CHECK(cfg.m1 == 100000);
    CHECK(cfg.batches == 30);
    CHECK(cfg.output.format == "both");

    CHECK_THROWS_AS(parse_config(nlohmann::json::object()), ConfigError);
    nlohmann::json bad = minimal;
    bad["targets"] = {{{"class", 1}, {"gamma_max", "sometimes"}}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    ExperimentConfig uneven = cfg;
    uneven.m1 = 100001; // not divisible by 30
    CHECK_THROWS_AS(validate(uneven), ConfigError);
    ExperimentConfig badfmt = cfg;
    badfmt.output.format = "yaml";
    CHECK_THROWS_AS(validate(badfmt), ConfigError);
    ExperimentConfig unstable = cfg;
    unstable.model = {{1.5}, {1.0}};
    CHECK_THROWS_AS(validate(unstable), UnstableModel);
}

TEST_CASE("error families map to distinct exit codes") {
    CHECK(ConfigError("x").exit_code() == 2);
    CHECK(UnstableModel("x").exit_code() == 2);
    CHECK(EmptySample("x").exit_code() == 3);
    CHECK(DegenerateElite("x").exit_code() == 3);
    CHECK(IterationCap("x").exit_code() == 3);
    CHECK(CycleLengthExceeded("x").exit_code() == 4);
}

TEST_CASE("estimate runner produces a sane quantile row") {
    fs::path dir = fresh_dir("pqtail_test_estimate");
    ExperimentConfig cfg = mm1_config(dir.string());
    cfg.baseline.kind = BaselineKind::naive;
    EstimateResult res = run_estimate(cfg);
    REQUIRE(res.rows.size() == 2);
    const EstimateRow& is = res.rows[0];
    const EstimateRow& nv = res.rows[1];
    CHECK(is.method == "alg1");
    CHECK(nv.method == "naive");
    // p = 0.9 is shallow, so both methods resolve it and their CIs overlap
    const double truth = mm1_sojourn_quantile(0.5, 1.0, 0.9);
    CHECK(is.report.q_hat == Catch::Approx(truth).epsilon(0.25));
    CHECK(nv.report.q_hat == Catch::Approx(truth).epsilon(0.25));
    CHECK(is.report.ci_low <= nv.report.ci_high);
    CHECK(nv.report.ci_low <= is.report.ci_high);
    CHECK(is.report.resolved);
    CHECK(is.gamma_max == 6.0);
    CHECK(is.switched_fraction >= 0.0);
    CHECK(is.switched_fraction <= 1.0);
    CHECK(is.has_rates);

    write_estimate_outputs(cfg, res);
    CHECK(fs::exists(dir / "estimate.csv"));
    CHECK(fs::exists(dir / "estimate.json"));
    // the json output round-trips the full-precision numbers
    nlohmann::json out = nlohmann::json::parse(slurp(dir / "estimate.json"));
    REQUIRE(out.at("rows").size() == 2);
    CHECK(out.at("rows")[0].at("quantile").at("q_hat").get<double>() == is.report.q_hat);
    CHECK(out.at("rows")[0].at("method").get<std::string>() == "alg1");
    std::string csv = slurp(dir / "estimate.csv");
    CHECK(csv.rfind("class,p,method,", 0) == 0);
}

TEST_CASE("validate runner estimates a fixed-level tail") {
    fs::path dir = fresh_dir("pqtail_test_validate");
    ExperimentConfig cfg = mm1_config(dir.string());
    cfg.baseline.kind = BaselineKind::naive;
    cfg.m1 = cfg.m2 = 3000; // the naive tail at 600 cycles is too noisy for a 30% gate
    const double gamma = mm1_sojourn_quantile(0.5, 1.0, 0.9); // true tail 0.1
    ValidateResult res = run_validate(cfg, gamma);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.rows[0].method == "alg1");
    CHECK(res.rows[1].method == "naive");
    CHECK(res.rows[0].tail.p_hat == Catch::Approx(0.1).epsilon(0.3));
    CHECK(res.rows[1].tail.p_hat == Catch::Approx(0.1).epsilon(0.3));
    CHECK_THROWS_AS(run_validate(cfg, -1.0), ConfigError);
    write_validate_outputs(cfg, res);
    CHECK(fs::exists(dir / "validate.csv"));
    CHECK(fs::exists(dir / "validate.json"));
}

TEST_CASE("benchmark runner aggregates replications") {
    fs::path dir = fresh_dir("pqtail_test_benchmark");
    ExperimentConfig cfg = mm1_config(dir.string());
    BenchmarkResult res = run_benchmark(cfg); // M/M/1: closed-form reference
    REQUIRE(res.rows.size() == 2);            // alg1 + naive, no static baseline
    const double truth = mm1_sojourn_quantile(0.5, 1.0, 0.9);
    for (const BenchmarkRow& row : res.rows) {
        CHECK(row.reference == Catch::Approx(truth).margin(1e-12));
        CHECK(row.replications == 3);
        CHECK(row.resolved == 3);
        CHECK(row.mean_q == Catch::Approx(truth).epsilon(0.3));
        CHECK(row.mse < truth * truth * 0.25);
        CHECK(row.coverage >= 0.0);
        CHECK(row.coverage <= 1.0);
    }
    CHECK(res.rows[0].method == "alg1");
    CHECK(res.rows[0].has_rates);
    CHECK(res.rows[1].method == "naive");
    CHECK_FALSE(res.rows[1].has_rates);
    write_benchmark_outputs(cfg, res);
    CHECK(fs::exists(dir / "benchmark.csv"));
    CHECK(fs::exists(dir / "benchmark.json"));
}

TEST_CASE("benchmark needs a reference for multi-class models") {
    ExperimentConfig cfg;
    cfg.model = {{0.2, 0.4}, {2.0, 1.0}};
    cfg.targets = {SlaTarget{1, 0.9, 5.0}};
    cfg.m1 = cfg.m2 = 60;
    cfg.replications = 1;
    validate(cfg);
    CHECK_THROWS_AS(run_benchmark(cfg), ConfigError);
}

TEST_CASE("blocking profile runner") {
    fs::path dir = fresh_dir("pqtail_test_blocking");
    ExperimentConfig cfg;
    cfg.model = {{0.2, 0.4}, {2.0, 1.0}};
    cfg.targets = {SlaTarget{1, 0.9, std::nullopt}};
    cfg.m1 = cfg.m2 = 600;
    cfg.ce.cycles_per_iteration = 2000;
    cfg.seed = 11;
    cfg.blocking.gamma = 2.0;
    cfg.blocking.cycles = 4000;
    cfg.baseline.kind = BaselineKind::static_tilt;
    cfg.baseline.lambda_tilde = {0.3, 0.5};
    cfg.baseline.mu_tilde = {1.5, 0.9};
    cfg.output.dir = dir.string();
    validate(cfg);
    BlockingResult res = run_blocking_profile(cfg);
    REQUIRE(res.rows.size() == 3); // naive, static, ce
    CHECK(res.rows[0].method == "naive");
    CHECK(res.rows[1].method == "static");
    CHECK(res.rows[2].method == "ce");
    for (const BlockingRow& row : res.rows) {
        CHECK(row.cycles == 4000);
        CHECK(row.effective_cycles > 0);
        CHECK(row.effective_cycles <= row.cycles);
        CHECK(row.long_delayed_jobs >= row.effective_cycles);
        double s = 0.0, sa = 0.0;
        for (double v : row.pred_frac) s += v;
        for (double v : row.job_pred_frac) sa += v;
        CHECK(s == Catch::Approx(1.0).margin(1e-12));
        CHECK(sa == Catch::Approx(1.0).margin(1e-12));
        CHECK(row.pred_none <= row.effective_cycles);
        CHECK(row.job_pred_none <= row.long_delayed_jobs);
    }
    CHECK(res.rows[2].has_rates);
    write_blocking_outputs(cfg, res);
    CHECK(fs::exists(dir / "blocking_profile.csv"));
    CHECK(fs::exists(dir / "blocking_profile.json"));

    // gamma = 0 degenerates to counting every served class-1 job
    ExperimentConfig all = cfg;
    all.blocking.gamma = 0.0;
    all.blocking.cycles = 500;
    BlockingResult deg = run_blocking_profile(all);
    const BlockingRow& naive = deg.rows[0];
    CHECK(naive.effective_cycles > 0);
    CHECK(naive.long_delayed_jobs >= naive.effective_cycles);
    double js = 0.0;
    for (double v : naive.job_pred_frac) js += v;
    CHECK(js == Catch::Approx(1.0).margin(1e-12));

    ExperimentConfig bad = cfg;
    bad.blocking.gamma = -1.0;
    CHECK_THROWS_AS(run_blocking_profile(bad), ConfigError);
}

TEST_CASE("sla runner sizes the production run from the pilot") {
    fs::path dir = fresh_dir("pqtail_test_sla");
    ExperimentConfig cfg = mm1_config(dir.string());
    cfg.sla.target_relative_error = 0.05;
    cfg.sla.presim_cycles = 600;
    cfg.sla.validation_cycles = 600;
    cfg.sla.max_cycles = 3000;
    SlaResult res = run_sla(cfg);
    REQUIRE(res.rows.size() == 1);
    const SlaRow& row = res.rows[0];
    CHECK(row.presim_cycles == 600);
    CHECK(row.m % 30 == 0);
    CHECK(row.m >= 30);
    if (row.capped) CHECK(row.m == 3000);
    const double truth = mm1_sojourn_quantile(0.5, 1.0, 0.9);
    CHECK(row.production.q_hat == Catch::Approx(truth).epsilon(0.25));
    // the validation tail at the estimated quantile sits near 1 - p
    CHECK(row.validation.p_hat == Catch::Approx(0.1).epsilon(0.5));
    write_sla_outputs(cfg, res);
    CHECK(fs::exists(dir / "sla.csv"));
    CHECK(fs::exists(dir / "sla.json"));
}

TEST_CASE("ce-search runner reports the full history") {
    fs::path dir = fresh_dir("pqtail_test_ce_search");
    ExperimentConfig cfg = mm1_config(dir.string());
    CESearchResult res = run_ce_search(cfg);
    REQUIRE(res.runs.size() == 1);
    const CEResult& ce = res.runs[0].second;
    CHECK(ce.gamma_max == 6.0);
    CHECK(ce.iterations >= 1);
    CHECK(static_cast<int>(ce.history.size()) == ce.iterations);
    write_ce_search_outputs(cfg, res);
    CHECK(fs::exists(dir / "ce_search.csv"));
    CHECK(fs::exists(dir / "ce_search.json"));
}

TEST_CASE("timings are opt-in and off by default") {
    fs::path dir = fresh_dir("pqtail_test_timings");
    ExperimentConfig cfg = mm1_config(dir.string());
    EstimateResult res = run_estimate(cfg);
    write_estimate_outputs(cfg, res);
    CHECK_FALSE(fs::exists(dir / "timings.csv"));
    cfg.output.emit_timings = true;
    write_estimate_outputs(cfg, res);
    CHECK(fs::exists(dir / "timings.csv"));
}

TEST_CASE("csv output is byte-identical across repeat runs") {
    fs::path dir_a = fresh_dir("pqtail_test_det_a");
    fs::path dir_b = fresh_dir("pqtail_test_det_b");
    ExperimentConfig cfg = mm1_config(dir_a.string());
    write_estimate_outputs(cfg, run_estimate(cfg));
    cfg.output.dir = dir_b.string();
    write_estimate_outputs(cfg, run_estimate(cfg));
    CHECK(slurp(dir_a / "estimate.csv") == slurp(dir_b / "estimate.csv"));
    CHECK(slurp(dir_a / "estimate.json") == slurp(dir_b / "estimate.json"));
}
