#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pqtail/config.hpp"
#include "pqtail/harness.hpp"
#include "pqtail/report.hpp"

namespace pqtail {

namespace detail {

inline std::string num_or_dash(double v) {
    return std::isfinite(v) ? fmt17(v) : std::string("-");
}

inline void json_num_or_null(JsonWriter& w, const std::string& key, double v) {
    w.key(key);
    if (std::isfinite(v))
        w.value(v);
    else
        w.null_value();
}

inline void csv_rates(CsvTable& t, bool has, const TiltedRates& r, int K) {
    for (int i = 0; i < K; ++i) t.add(has ? fmt17(r.lambda_tilde[i]) : std::string("-"));
    for (int i = 0; i < K; ++i) t.add(has ? fmt17(r.mu_tilde[i]) : std::string("-"));
}

inline void csv_rates_header(CsvTable& t, int K) {
    for (int i = 1; i <= K; ++i) t.add("lambda_tilde_" + std::to_string(i));
    for (int i = 1; i <= K; ++i) t.add("mu_tilde_" + std::to_string(i));
}

inline void json_rates(JsonWriter& w, bool has, const TiltedRates& r) {
    w.key("rates");
    if (!has) {
        w.null_value();
        return;
    }
    w.begin_object();
    w.key("lambda_tilde");
    w.begin_array();
    for (double v : r.lambda_tilde) w.value(v);
    w.end_array();
    w.key("mu_tilde");
    w.begin_array();
    for (double v : r.mu_tilde) w.value(v);
    w.end_array();
    w.end_object();
}

inline void json_quantile_report(JsonWriter& w, const QuantileReport& q) {
    w.begin_object();
    w.key("q_hat");
    w.value(q.q_hat);
    w.key("ci_low");
    w.value(q.ci_low);
    w.key("ci_high");
    w.value(q.ci_high);
    w.key("sigma_hat");
    w.value(q.sigma_hat);
    w.key("relative_error");
    w.value(q.relative_error);
    w.key("batches");
    w.value(static_cast<std::uint64_t>(q.r));
    w.key("m1");
    w.value(q.m1);
    w.key("m2");
    w.value(q.m2);
    w.key("beta");
    w.value(q.beta);
    w.key("resolved");
    w.value(q.resolved);
    w.end_object();
}

inline void json_tail_report(JsonWriter& w, const TailReport& t) {
    w.begin_object();
    w.key("p_hat");
    w.value(t.p_hat);
    w.key("ci_low");
    w.value(t.ci_low);
    w.key("ci_high");
    w.value(t.ci_high);
    w.key("sigma_hat");
    w.value(t.sigma_hat);
    w.key("relative_error");
    w.value(t.relative_error);
    w.key("batches");
    w.value(static_cast<std::uint64_t>(t.r));
    w.end_object();
}

inline void json_model(JsonWriter& w, const ModelParams& m) {
    w.key("model");
    w.begin_object();
    w.key("lambda");
    w.begin_array();
    for (double v : m.lambda) w.value(v);
    w.end_array();
    w.key("mu");
    w.begin_array();
    for (double v : m.mu) w.value(v);
    w.end_array();
    w.end_object();
}

struct OutputSink {
    std::filesystem::path dir;
    bool csv = true;
    bool json = true;

    explicit OutputSink(const ExperimentConfig& cfg) : dir(cfg.output.dir) {
        csv = cfg.output.format == "csv" || cfg.output.format == "both";
        json = cfg.output.format == "json" || cfg.output.format == "both";
    }
    void write_csv(const std::string& name, const CsvTable& t) const {
        if (csv) write_text_file(dir / (name + ".csv"), t.str());
    }
    void write_json(const std::string& name, const JsonWriter& w) const {
        if (json) write_text_file(dir / (name + ".json"), w.str());
    }
};

inline void emit_timings_csv(const OutputSink& sink, const std::string& command,
                             const std::vector<std::pair<std::string, PhaseTimings>>& rows) {
    CsvTable t;
    t.add("command");
    t.add("row");
    t.add("denominator_s");
    t.add("ce_s");
    t.add("production_s");
    t.add("validation_s");
    t.add("total_s");
    t.end_row();
    for (const auto& [label, tm] : rows) {
        t.add(command);
        t.add(label);
        t.add(fmt6(tm.denominator));
        t.add(fmt6(tm.ce));
        t.add(fmt6(tm.production));
        t.add(fmt6(tm.validation));
        t.add(fmt6(tm.total()));
        t.end_row();
    }
    write_text_file(sink.dir / "timings.csv", t.str());
}

} // namespace detail

/// ---------------------------------------------------------------- estimate

inline void write_estimate_outputs(const ExperimentConfig& cfg, const EstimateResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("class");
    t.add("p");
    t.add("method");
    t.add("gamma_max");
    t.add("gamma_auto");
    t.add("ce_iterations");
    t.add("m1");
    t.add("m2");
    t.add("beta");
    t.add("switched_fraction");
    t.add("q_hat");
    t.add("ci_low");
    t.add("ci_high");
    t.add("sigma_hat");
    t.add("relative_error");
    t.add("resolved");
    detail::csv_rates_header(t, K);
    t.end_row();
    for (const EstimateRow& r : res.rows) {
        t.add(std::to_string(r.target_class));
        t.add(fmt17(r.p));
        t.add(r.method);
        t.add(r.has_rates ? fmt17(r.gamma_max) : std::string("-"));
        t.add(r.gamma_auto ? "1" : "0");
        t.add(std::to_string(r.ce_iterations));
        t.add(std::to_string(r.report.m1));
        t.add(std::to_string(r.report.m2));
        t.add(std::to_string(r.report.beta));
        t.add(fmt17(r.switched_fraction));
        t.add(fmt17(r.report.q_hat));
        t.add(fmt17(r.report.ci_low));
        t.add(fmt17(r.report.ci_high));
        t.add(fmt17(r.report.sigma_hat));
        t.add(fmt17(r.report.relative_error));
        t.add(r.report.resolved ? "1" : "0");
        detail::csv_rates(t, r.has_rates, r.rates, K);
        t.end_row();
    }
    sink.write_csv("estimate", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("estimate"));
    w.key("seed");
    w.value(cfg.seed);
    detail::json_model(w, cfg.model);
    w.key("rows");
    w.begin_array();
    for (const EstimateRow& r : res.rows) {
        w.begin_object();
        w.key("class");
        w.value(static_cast<std::uint64_t>(r.target_class));
        w.key("p");
        w.value(r.p);
        w.key("method");
        w.value(r.method);
        if (r.has_rates) {
            w.key("gamma_max");
            w.value(r.gamma_max);
            w.key("gamma_auto");
            w.value(r.gamma_auto);
            w.key("ce_iterations");
            w.value(static_cast<std::uint64_t>(r.ce_iterations));
        }
        w.key("switched_fraction");
        w.value(r.switched_fraction);
        detail::json_rates(w, r.has_rates, r.rates);
        w.key("quantile");
        detail::json_quantile_report(w, r.report);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("estimate", w);

    if (cfg.output.emit_timings) {
        std::vector<std::pair<std::string, PhaseTimings>> tm;
        for (const EstimateRow& r : res.rows)
            tm.emplace_back("class" + std::to_string(r.target_class) + "/" + r.method, r.timings);
        detail::emit_timings_csv(sink, "estimate", tm);
    }

    std::vector<std::string> head = {"class", "p",       "method", "q_hat",
                                     "ci_low", "ci_high", "rel_err", "resolved"};
    std::vector<std::vector<std::string>> body;
    for (const EstimateRow& r : res.rows)
        body.push_back({std::to_string(r.target_class), fmt6(r.p), r.method, fmt6(r.report.q_hat),
                        fmt6(r.report.ci_low), fmt6(r.report.ci_high),
                        fmt6(r.report.relative_error), r.report.resolved ? "yes" : "no"});
    print_table(std::cout, head, body);
}

/// --------------------------------------------------------------- benchmark

inline void write_benchmark_outputs(const ExperimentConfig& cfg, const BenchmarkResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("class");
    t.add("p");
    t.add("method");
    t.add("reference");
    t.add("m1");
    t.add("m2");
    t.add("replications");
    t.add("resolved");
    t.add("mean_q");
    t.add("var_q");
    t.add("mse");
    t.add("coverage");
    t.add("gamma_max");
    t.add("ce_iterations");
    detail::csv_rates_header(t, K);
    if (cfg.output.emit_timings) t.add("seconds");
    t.end_row();
    for (const BenchmarkRow& r : res.rows) {
        t.add(std::to_string(r.target_class));
        t.add(fmt17(r.p));
        t.add(r.method);
        t.add(fmt17(r.reference));
        t.add(std::to_string(r.m1));
        t.add(std::to_string(r.m2));
        t.add(std::to_string(r.replications));
        t.add(std::to_string(r.resolved));
        t.add(detail::num_or_dash(r.mean_q));
        t.add(detail::num_or_dash(r.var_q));
        t.add(detail::num_or_dash(r.mse));
        t.add(detail::num_or_dash(r.coverage));
        t.add(detail::num_or_dash(r.gamma_max));
        t.add(std::to_string(r.ce_iterations));
        detail::csv_rates(t, r.has_rates, r.rates, K);
        if (cfg.output.emit_timings) t.add(fmt6(r.seconds));
        t.end_row();
    }
    sink.write_csv("benchmark", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("benchmark"));
    w.key("seed");
    w.value(cfg.seed);
    detail::json_model(w, cfg.model);
    w.key("rows");
    w.begin_array();
    for (const BenchmarkRow& r : res.rows) {
        w.begin_object();
        w.key("class");
        w.value(static_cast<std::uint64_t>(r.target_class));
        w.key("p");
        w.value(r.p);
        w.key("method");
        w.value(r.method);
        w.key("reference");
        w.value(r.reference);
        w.key("m1");
        w.value(r.m1);
        w.key("m2");
        w.value(r.m2);
        w.key("replications");
        w.value(static_cast<std::uint64_t>(r.replications));
        w.key("resolved");
        w.value(static_cast<std::uint64_t>(r.resolved));
        detail::json_num_or_null(w, "mean_q", r.mean_q);
        detail::json_num_or_null(w, "var_q", r.var_q);
        detail::json_num_or_null(w, "mse", r.mse);
        detail::json_num_or_null(w, "coverage", r.coverage);
        detail::json_num_or_null(w, "gamma_max", r.gamma_max);
        w.key("ce_iterations");
        w.value(static_cast<std::uint64_t>(r.ce_iterations));
        detail::json_rates(w, r.has_rates, r.rates);
        if (cfg.output.emit_timings) {
            w.key("seconds");
            w.value(r.seconds);
        }
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("benchmark", w);

    std::vector<std::string> head = {"class", "p",   "method",   "reference", "mean_q",
                                     "var_q", "mse", "coverage", "resolved"};
    std::vector<std::vector<std::string>> body;
    for (const BenchmarkRow& r : res.rows)
        body.push_back({std::to_string(r.target_class), fmt6(r.p), r.method, fmt6(r.reference),
                        std::isfinite(r.mean_q) ? fmt6(r.mean_q) : "-",
                        std::isfinite(r.var_q) ? fmt6(r.var_q) : "-",
                        std::isfinite(r.mse) ? fmt6(r.mse) : "-",
                        std::isfinite(r.coverage) ? fmt6(r.coverage) : "-",
                        std::to_string(r.resolved) + "/" + std::to_string(r.replications)});
    print_table(std::cout, head, body);
}

/// --------------------------------------------------------- blocking profile

inline void write_blocking_outputs(const ExperimentConfig& cfg, const BlockingResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("method");
    t.add("gamma");
    t.add("cycles");
    t.add("effective_cycles");
    t.add("long_delayed_jobs");
    for (int c = 1; c <= K; ++c) t.add("pred_class_" + std::to_string(c));
    t.add("pred_none");
    for (int c = 1; c <= K; ++c) t.add("job_pred_class_" + std::to_string(c));
    t.add("job_pred_none");
    detail::csv_rates_header(t, K);
    if (cfg.output.emit_timings) t.add("seconds");
    t.end_row();
    for (const BlockingRow& r : res.rows) {
        t.add(r.method);
        t.add(fmt17(res.gamma));
        t.add(std::to_string(r.cycles));
        t.add(std::to_string(r.effective_cycles));
        t.add(std::to_string(r.long_delayed_jobs));
        for (int c = 0; c < K; ++c) t.add(fmt17(r.pred_frac[c]));
        t.add(std::to_string(r.pred_none));
        for (int c = 0; c < K; ++c) t.add(fmt17(r.job_pred_frac[c]));
        t.add(std::to_string(r.job_pred_none));
        detail::csv_rates(t, r.has_rates, r.rates, K);
        if (cfg.output.emit_timings) t.add(fmt6(r.seconds));
        t.end_row();
    }
    sink.write_csv("blocking_profile", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("blocking-profile"));
    w.key("seed");
    w.value(cfg.seed);
    w.key("gamma");
    w.value(res.gamma);
    detail::json_model(w, cfg.model);
    w.key("rows");
    w.begin_array();
    for (const BlockingRow& r : res.rows) {
        w.begin_object();
        w.key("method");
        w.value(r.method);
        w.key("cycles");
        w.value(r.cycles);
        w.key("effective_cycles");
        w.value(r.effective_cycles);
        w.key("long_delayed_jobs");
        w.value(r.long_delayed_jobs);
        w.key("pred_frac");
        w.begin_array();
        for (double v : r.pred_frac) w.value(v);
        w.end_array();
        w.key("pred_none");
        w.value(r.pred_none);
        w.key("job_pred_frac");
        w.begin_array();
        for (double v : r.job_pred_frac) w.value(v);
        w.end_array();
        w.key("job_pred_none");
        w.value(r.job_pred_none);
        detail::json_rates(w, r.has_rates, r.rates);
        if (cfg.output.emit_timings) {
            w.key("seconds");
            w.value(r.seconds);
        }
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("blocking_profile", w);

    std::vector<std::string> head = {"method", "effective", "jobs"};
    for (int c = 1; c <= K; ++c) head.push_back("pred_" + std::to_string(c));
    std::vector<std::vector<std::string>> body;
    for (const BlockingRow& r : res.rows) {
        std::vector<std::string> line = {r.method, std::to_string(r.effective_cycles),
                                         std::to_string(r.long_delayed_jobs)};
        for (int c = 0; c < K; ++c) line.push_back(fmt6(r.pred_frac[c]));
        body.push_back(std::move(line));
    }
    print_table(std::cout, head, body);
}

/// --------------------------------------------------------------------- sla

inline void write_sla_outputs(const ExperimentConfig& cfg, const SlaResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("class");
    t.add("p");
    t.add("gamma_max");
    t.add("gamma_auto");
    t.add("ce_iterations");
    t.add("presim_cycles");
    t.add("presim_rel_err");
    t.add("m");
    t.add("capped");
    t.add("q_hat");
    t.add("ci_low");
    t.add("ci_high");
    t.add("relative_error");
    t.add("resolved");
    t.add("validation_p_hat");
    t.add("validation_ci_low");
    t.add("validation_ci_high");
    detail::csv_rates_header(t, K);
    t.end_row();
    for (const SlaRow& r : res.rows) {
        t.add(std::to_string(r.target_class));
        t.add(fmt17(r.p));
        t.add(fmt17(r.gamma_max));
        t.add(r.gamma_auto ? "1" : "0");
        t.add(std::to_string(r.ce_iterations));
        t.add(std::to_string(r.presim_cycles));
        t.add(fmt17(r.presim.relative_error));
        t.add(std::to_string(r.m));
        t.add(r.capped ? "1" : "0");
        t.add(fmt17(r.production.q_hat));
        t.add(fmt17(r.production.ci_low));
        t.add(fmt17(r.production.ci_high));
        t.add(fmt17(r.production.relative_error));
        t.add(r.production.resolved ? "1" : "0");
        t.add(fmt17(r.validation.p_hat));
        t.add(fmt17(r.validation.ci_low));
        t.add(fmt17(r.validation.ci_high));
        detail::csv_rates(t, true, r.rates, K);
        t.end_row();
    }
    sink.write_csv("sla", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("sla8"));
    w.key("seed");
    w.value(cfg.seed);
    detail::json_model(w, cfg.model);
    w.key("rows");
    w.begin_array();
    for (const SlaRow& r : res.rows) {
        w.begin_object();
        w.key("class");
        w.value(static_cast<std::uint64_t>(r.target_class));
        w.key("p");
        w.value(r.p);
        w.key("gamma_max");
        w.value(r.gamma_max);
        w.key("gamma_auto");
        w.value(r.gamma_auto);
        w.key("ce_iterations");
        w.value(static_cast<std::uint64_t>(r.ce_iterations));
        w.key("presim_cycles");
        w.value(r.presim_cycles);
        w.key("presim");
        detail::json_quantile_report(w, r.presim);
        w.key("m");
        w.value(r.m);
        w.key("capped");
        w.value(r.capped);
        w.key("production");
        detail::json_quantile_report(w, r.production);
        w.key("validation");
        detail::json_tail_report(w, r.validation);
        detail::json_rates(w, true, r.rates);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("sla", w);

    if (cfg.output.emit_timings) {
        std::vector<std::pair<std::string, PhaseTimings>> tm;
        for (const SlaRow& r : res.rows)
            tm.emplace_back("class" + std::to_string(r.target_class), r.timings);
        detail::emit_timings_csv(sink, "sla8", tm);
    }

    std::vector<std::string> head = {"class", "p",       "m",       "q_hat",
                                     "ci_low", "ci_high", "rel_err", "val_p_hat"};
    std::vector<std::vector<std::string>> body;
    for (const SlaRow& r : res.rows)
        body.push_back({std::to_string(r.target_class), fmt6(r.p), std::to_string(r.m),
                        fmt6(r.production.q_hat), fmt6(r.production.ci_low),
                        fmt6(r.production.ci_high), fmt6(r.production.relative_error),
                        fmt6(r.validation.p_hat)});
    print_table(std::cout, head, body);
}

/// --------------------------------------------------------------- ce-search

inline void write_ce_search_outputs(const ExperimentConfig& cfg, const CESearchResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("class");
    t.add("p");
    t.add("iteration");
    t.add("gamma");
    t.add("elite_cycles");
    detail::csv_rates_header(t, K);
    if (cfg.output.emit_timings) t.add("seconds");
    t.end_row();
    for (const auto& [target, ce] : res.runs) {
        for (const CEIteration& it : ce.history) {
            t.add(std::to_string(target.target_class));
            t.add(fmt17(target.p));
            t.add(std::to_string(it.t));
            t.add(fmt17(it.gamma));
            t.add(std::to_string(it.elite_cycles));
            detail::csv_rates(t, true, it.rates, K);
            if (cfg.output.emit_timings) t.add(fmt6(it.seconds));
            t.end_row();
        }
    }
    sink.write_csv("ce_search", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("ce-search"));
    w.key("seed");
    w.value(cfg.seed);
    detail::json_model(w, cfg.model);
    w.key("runs");
    w.begin_array();
    for (const auto& [target, ce] : res.runs) {
        w.begin_object();
        w.key("class");
        w.value(static_cast<std::uint64_t>(target.target_class));
        w.key("p");
        w.value(target.p);
        w.key("gamma_max");
        w.value(ce.gamma_max);
        w.key("adopted_by_heuristic");
        w.value(ce.adopted_by_heuristic);
        w.key("iterations");
        w.value(static_cast<std::uint64_t>(ce.iterations));
        detail::json_rates(w, true, ce.rates);
        w.key("history");
        w.begin_array();
        for (const CEIteration& it : ce.history) {
            w.begin_object();
            w.key("t");
            w.value(static_cast<std::uint64_t>(it.t));
            w.key("gamma");
            w.value(it.gamma);
            w.key("elite_cycles");
            w.value(it.elite_cycles);
            detail::json_rates(w, true, it.rates);
            if (cfg.output.emit_timings) {
                w.key("seconds");
                w.value(it.seconds);
            }
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("ce_search", w);

    std::vector<std::string> head = {"class", "iter", "gamma"};
    for (int c = 1; c <= K; ++c) head.push_back("lt_" + std::to_string(c));
    for (int c = 1; c <= K; ++c) head.push_back("mt_" + std::to_string(c));
    std::vector<std::vector<std::string>> body;
    for (const auto& [target, ce] : res.runs)
        for (const CEIteration& it : ce.history) {
            std::vector<std::string> line = {std::to_string(target.target_class),
                                             std::to_string(it.t), fmt6(it.gamma)};
            for (int c = 0; c < K; ++c) line.push_back(fmt6(it.rates.lambda_tilde[c]));
            for (int c = 0; c < K; ++c) line.push_back(fmt6(it.rates.mu_tilde[c]));
            body.push_back(std::move(line));
        }
    print_table(std::cout, head, body);
}

/// ---------------------------------------------------------------- validate

inline void write_validate_outputs(const ExperimentConfig& cfg, const ValidateResult& res) {
    const int K = cfg.model.num_classes();
    detail::OutputSink sink(cfg);

    CsvTable t;
    t.add("class");
    t.add("gamma");
    t.add("method");
    t.add("p_hat");
    t.add("ci_low");
    t.add("ci_high");
    t.add("sigma_hat");
    t.add("relative_error");
    t.add("ce_iterations");
    detail::csv_rates_header(t, K);
    t.end_row();
    for (const ValidateRow& r : res.rows) {
        t.add(std::to_string(r.target_class));
        t.add(fmt17(r.gamma));
        t.add(r.method);
        t.add(fmt17(r.tail.p_hat));
        t.add(fmt17(r.tail.ci_low));
        t.add(fmt17(r.tail.ci_high));
        t.add(fmt17(r.tail.sigma_hat));
        t.add(fmt17(r.tail.relative_error));
        t.add(std::to_string(r.ce_iterations));
        detail::csv_rates(t, r.has_rates, r.rates, K);
        t.end_row();
    }
    sink.write_csv("validate", t);

    JsonWriter w;
    w.begin_object();
    w.key("command");
    w.value(std::string("validate"));
    w.key("seed");
    w.value(cfg.seed);
    detail::json_model(w, cfg.model);
    w.key("rows");
    w.begin_array();
    for (const ValidateRow& r : res.rows) {
        w.begin_object();
        w.key("class");
        w.value(static_cast<std::uint64_t>(r.target_class));
        w.key("gamma");
        w.value(r.gamma);
        w.key("method");
        w.value(r.method);
        w.key("tail");
        detail::json_tail_report(w, r.tail);
        w.key("ce_iterations");
        w.value(static_cast<std::uint64_t>(r.ce_iterations));
        detail::json_rates(w, r.has_rates, r.rates);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    sink.write_json("validate", w);

    std::vector<std::string> head = {"class", "gamma", "method", "p_hat", "ci_low", "ci_high"};
    std::vector<std::vector<std::string>> body;
    for (const ValidateRow& r : res.rows)
        body.push_back({std::to_string(r.target_class), fmt6(r.gamma), r.method,
                        fmt6(r.tail.p_hat), fmt6(r.tail.ci_low), fmt6(r.tail.ci_high)});
    print_table(std::cout, head, body);
}

} // namespace pqtail
