#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqtail/ce.hpp"
#include "pqtail/errors.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"

namespace pqtail {

enum class BaselineKind { none, naive, static_tilt };

struct BaselineSpec {
    BaselineKind kind = BaselineKind::none;
    std::vector<double> lambda_tilde;
    std::vector<double> mu_tilde;
};

struct OutputSpec {
    std::string dir = "out";
    std::string format = "both"; // csv | json | both
    bool emit_timings = false;
};

struct BlockingSpec {
    double gamma = 0.0;
    std::uint64_t cycles = 1000000;
};

struct SlaSpec {
    double target_relative_error = 0.001;
    std::uint64_t presim_cycles = 10000;
    std::uint64_t validation_cycles = 100000;
    std::uint64_t max_cycles = 10000000; // hard cap on the sized production run
};

struct ExperimentConfig {
    ModelParams model;
    std::vector<SlaTarget> targets;
    std::uint64_t m1 = 100000;
    std::uint64_t m2 = 100000;
    CEConfig ce;
    BaselineSpec baseline;
    std::uint64_t seed = 1;
    int workers = 1;
    int batches = 30;
    std::uint64_t max_events_per_cycle = 100000000ULL;
    int replications = 100;
    std::map<int, double> reference; // class -> reference quantile (benchmark)
    BlockingSpec blocking;
    SlaSpec sla;
    OutputSpec output;
};

namespace detail {

using nlohmann::json;

inline double num(const json& j, const char* what) {
    if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
    return j.get<double>();
}

inline std::uint64_t unum(const json& j, const char* what) {
    if (!j.is_number_unsigned() && !j.is_number_integer())
        throw ConfigError(std::string(what) + " must be a non-negative integer");
    auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(std::string(what) + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

inline std::vector<double> num_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(num(x, what));
    return v;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::num;
    using detail::num_vector;
    using detail::unum;
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    if (!j.contains("model")) throw ConfigError("config needs a \"model\" section");
    const auto& jm = j.at("model");
    if (!jm.contains("lambda") || !jm.contains("mu"))
        throw ConfigError("model needs \"lambda\" and \"mu\" arrays");
    cfg.model.lambda = num_vector(jm.at("lambda"), "model.lambda");
    cfg.model.mu = num_vector(jm.at("mu"), "model.mu");

    if (j.contains("targets")) {
        for (const auto& jt : j.at("targets")) {
            SlaTarget t;
            t.target_class = static_cast<int>(unum(jt.at("class"), "target class"));
            t.p = jt.contains("p") ? num(jt.at("p"), "target p") : 0.999;
            if (jt.contains("gamma_max")) {
                const auto& g = jt.at("gamma_max");
                if (g.is_string()) {
                    const std::string s = g.get<std::string>();
                    if (s != "auto" && s != "unknown")
                        throw ConfigError("gamma_max must be a number or \"auto\"");
                } else {
                    t.gamma_max = num(g, "gamma_max");
                }
            }
            cfg.targets.push_back(t);
        }
    }
    if (cfg.targets.empty()) {
        for (int k = 1; k <= cfg.model.num_classes(); ++k)
            cfg.targets.push_back(SlaTarget{k, 0.999, std::nullopt});
    }

    if (j.contains("cycles")) {
        const auto& jc = j.at("cycles");
        if (jc.is_object()) {
            cfg.m1 = unum(jc.at("m1"), "cycles.m1");
            cfg.m2 = unum(jc.at("m2"), "cycles.m2");
        } else {
            cfg.m1 = cfg.m2 = unum(jc, "cycles");
        }
    }

    if (j.contains("ce")) {
        const auto& jc = j.at("ce");
        if (jc.contains("cycles_per_iteration"))
            cfg.ce.cycles_per_iteration = unum(jc.at("cycles_per_iteration"), "ce.cycles_per_iteration");
        if (jc.contains("elite_fraction"))
            cfg.ce.elite_fraction = num(jc.at("elite_fraction"), "ce.elite_fraction");
        if (jc.contains("max_iterations"))
            cfg.ce.max_iterations = static_cast<int>(unum(jc.at("max_iterations"), "ce.max_iterations"));
        if (jc.contains("stall_limit"))
            cfg.ce.stall_limit = static_cast<int>(unum(jc.at("stall_limit"), "ce.stall_limit"));
        if (jc.contains("pilot_cycles"))
            cfg.ce.pilot_cycles = unum(jc.at("pilot_cycles"), "ce.pilot_cycles");
        if (jc.contains("pilot_batches"))
            cfg.ce.pilot_batches = static_cast<int>(unum(jc.at("pilot_batches"), "ce.pilot_batches"));
        if (jc.contains("smoothing")) cfg.ce.smoothing = num(jc.at("smoothing"), "ce.smoothing");
    }

    if (j.contains("baseline")) {
        const auto& jb = j.at("baseline");
        const std::string kind = jb.value("kind", std::string("none"));
        if (kind == "none") {
            cfg.baseline.kind = BaselineKind::none;
        } else if (kind == "naive") {
            cfg.baseline.kind = BaselineKind::naive;
        } else if (kind == "static_tilt") {
            cfg.baseline.kind = BaselineKind::static_tilt;
            cfg.baseline.lambda_tilde = num_vector(jb.at("lambda_tilde"), "baseline.lambda_tilde");
            cfg.baseline.mu_tilde = num_vector(jb.at("mu_tilde"), "baseline.mu_tilde");
        } else {
            throw ConfigError("baseline.kind must be none, naive or static_tilt");
        }
    }

    if (j.contains("seed")) cfg.seed = unum(j.at("seed"), "seed");
    if (j.contains("workers")) cfg.workers = static_cast<int>(unum(j.at("workers"), "workers"));
    if (j.contains("batches")) cfg.batches = static_cast<int>(unum(j.at("batches"), "batches"));
    if (j.contains("max_events_per_cycle"))
        cfg.max_events_per_cycle = unum(j.at("max_events_per_cycle"), "max_events_per_cycle");
    if (j.contains("replications"))
        cfg.replications = static_cast<int>(unum(j.at("replications"), "replications"));

    if (j.contains("reference")) {
        for (const auto& [key, val] : j.at("reference").items())
            cfg.reference[std::stoi(key)] = detail::num(val, "reference");
    }

    if (j.contains("blocking")) {
        const auto& jb = j.at("blocking");
        if (jb.contains("gamma")) cfg.blocking.gamma = num(jb.at("gamma"), "blocking.gamma");
        if (jb.contains("cycles")) cfg.blocking.cycles = unum(jb.at("cycles"), "blocking.cycles");
    }

    if (j.contains("sla")) {
        const auto& js = j.at("sla");
        if (js.contains("relative_error"))
            cfg.sla.target_relative_error = num(js.at("relative_error"), "sla.relative_error");
        if (js.contains("presim_cycles"))
            cfg.sla.presim_cycles = unum(js.at("presim_cycles"), "sla.presim_cycles");
        if (js.contains("validation_cycles"))
            cfg.sla.validation_cycles = unum(js.at("validation_cycles"), "sla.validation_cycles");
        if (js.contains("max_cycles")) cfg.sla.max_cycles = unum(js.at("max_cycles"), "sla.max_cycles");
    }

    if (j.contains("output")) {
        const auto& jo = j.at("output");
        cfg.output.dir = jo.value("dir", cfg.output.dir);
        cfg.output.format = jo.value("format", cfg.output.format);
        cfg.output.emit_timings = jo.value("emit_timings", cfg.output.emit_timings);
    }
    return cfg;
}

inline void validate(const ExperimentConfig& cfg) {
    validate(cfg.model);
    if (cfg.targets.empty()) throw ConfigError("config needs at least one target");
    for (const auto& t : cfg.targets) validate(cfg.model, t);
    validate(cfg.ce);
    if (cfg.batches < 2) throw ConfigError("batches must be >= 2");
    if (cfg.m1 < static_cast<std::uint64_t>(cfg.batches) ||
        cfg.m2 < static_cast<std::uint64_t>(cfg.batches))
        throw ConfigError("m1 and m2 must be at least the batch count");
    if (cfg.m1 % cfg.batches != 0 || cfg.m2 % cfg.batches != 0)
        throw ConfigError("m1 and m2 must divide evenly into the batch count");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
    if (cfg.baseline.kind == BaselineKind::static_tilt) {
        if (cfg.baseline.lambda_tilde.size() != cfg.model.lambda.size() ||
            cfg.baseline.mu_tilde.size() != cfg.model.mu.size())
            throw ConfigError("baseline tilt vectors must match the model's class count");
        for (double v : cfg.baseline.lambda_tilde)
            if (!(v > 0.0)) throw NonPositiveRate("baseline lambda_tilde must be positive");
        for (double v : cfg.baseline.mu_tilde)
            if (!(v > 0.0)) throw NonPositiveRate("baseline mu_tilde must be positive");
    }
    if (cfg.output.format != "csv" && cfg.output.format != "json" && cfg.output.format != "both")
        throw ConfigError("output format must be csv, json or both");
    if (!(cfg.sla.target_relative_error > 0.0))
        throw ConfigError("sla.relative_error must be positive");
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    ExperimentConfig cfg = parse_config(j);
    validate(cfg);
    return cfg;
}

} // namespace pqtail
