#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pqtail/pqtail.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> cycles;
    std::optional<int> target_class;
    std::optional<double> p;
    std::string gamma_max_raw; // number or "auto"
    std::optional<int> batches;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> format;
    bool emit_timings = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config (json)")->required();
    cmd->add_option("--seed", f.seed, "master seed override");
    cmd->add_option("--cycles", f.cycles, "cycle count override (numerator and denominator)");
    cmd->add_option("--class", f.target_class, "restrict to one target class");
    cmd->add_option("--p", f.p, "quantile level override");
    cmd->add_option("--gamma-max", f.gamma_max_raw,
                    "switching level: a number, or 'auto' to discover it");
    cmd->add_option("--batches", f.batches, "batch count for the CIs");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--format", f.format, "output format")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    cmd->add_flag("--emit-timings", f.emit_timings, "include wall-clock timing columns");
}

pqtail::ExperimentConfig make_config(const CommonFlags& f) {
    pqtail::ExperimentConfig cfg = pqtail::load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.cycles) {
        cfg.m1 = *f.cycles;
        cfg.m2 = *f.cycles;
    }
    if (f.batches) cfg.batches = *f.batches;
    if (f.workers) cfg.workers = *f.workers;
    if (f.out) cfg.output.dir = *f.out;
    if (f.format) cfg.output.format = *f.format;
    if (f.emit_timings) cfg.output.emit_timings = true;

    if (f.target_class) {
        std::vector<pqtail::SlaTarget> kept;
        for (const auto& t : cfg.targets)
            if (t.target_class == *f.target_class) kept.push_back(t);
        if (kept.empty()) {
            pqtail::SlaTarget t;
            t.target_class = *f.target_class;
            kept.push_back(t);
        }
        cfg.targets = std::move(kept);
    }
    if (f.p)
        for (auto& t : cfg.targets) t.p = *f.p;
    if (!f.gamma_max_raw.empty()) {
        if (f.gamma_max_raw == "auto" || f.gamma_max_raw == "unknown") {
            for (auto& t : cfg.targets) t.gamma_max.reset();
        } else {
            double g = 0.0;
            try {
                std::size_t pos = 0;
                g = std::stod(f.gamma_max_raw, &pos);
                if (pos != f.gamma_max_raw.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw pqtail::ConfigError("--gamma-max expects a number or 'auto'");
            }
            for (auto& t : cfg.targets) t.gamma_max = g;
        }
    }
    pqtail::validate(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tail quantile estimation for non-preemptive priority queues"};
    app.require_subcommand(1);

    CommonFlags f;
    std::optional<double> gamma;
    std::optional<int> replications;

    CLI::App* c_estimate =
        app.add_subcommand("estimate", "quantile point estimates with batch-means CIs");
    add_common(c_estimate, f);

    CLI::App* c_benchmark =
        app.add_subcommand("benchmark", "replicated accuracy comparison against a reference");
    add_common(c_benchmark, f);
    c_benchmark->add_option("--replications", replications, "independent replications");

    CLI::App* c_blocking =
        app.add_subcommand("blocking-profile", "who blocks long-delayed top-priority jobs");
    add_common(c_blocking, f);
    c_blocking->add_option("--gamma", gamma, "delay threshold");

    CLI::App* c_sla = app.add_subcommand("sla8", "presim-sized production run per target");
    add_common(c_sla, f);

    CLI::App* c_ce = app.add_subcommand("ce-search", "cross-entropy tilt search only");
    add_common(c_ce, f);

    CLI::App* c_validate =
        app.add_subcommand("validate", "tail probability at a fixed threshold");
    add_common(c_validate, f);
    c_validate->add_option("--gamma", gamma, "threshold to evaluate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        pqtail::ExperimentConfig cfg = make_config(f);
        if (c_estimate->parsed()) {
            write_estimate_outputs(cfg, pqtail::run_estimate(cfg));
        } else if (c_benchmark->parsed()) {
            if (replications) cfg.replications = *replications;
            write_benchmark_outputs(cfg, pqtail::run_benchmark(cfg));
        } else if (c_blocking->parsed()) {
            if (gamma) cfg.blocking.gamma = *gamma;
            if (f.cycles) cfg.blocking.cycles = *f.cycles;
            write_blocking_outputs(cfg, pqtail::run_blocking_profile(cfg));
        } else if (c_sla->parsed()) {
            write_sla_outputs(cfg, pqtail::run_sla(cfg));
        } else if (c_ce->parsed()) {
            write_ce_search_outputs(cfg, pqtail::run_ce_search(cfg));
        } else if (c_validate->parsed()) {
            write_validate_outputs(cfg, pqtail::run_validate(cfg, *gamma));
        }
        return 0;
    } catch (const pqtail::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
