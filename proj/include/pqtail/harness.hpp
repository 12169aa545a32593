#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pqtail/ce.hpp"
#include "pqtail/config.hpp"
#include "pqtail/engine.hpp"
#include "pqtail/errors.hpp"
#include "pqtail/estimate.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"
#include "pqtail/parallel.hpp"
#include "pqtail/report.hpp"
#include "pqtail/rng.hpp"

namespace pqtail {

struct PhaseTimings {
    double denominator = 0.0;
    double ce = 0.0;
    double production = 0.0;
    double validation = 0.0;
    double total() const { return denominator + ce + production + validation; }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline std::uint64_t target_seed(std::uint64_t seed, int k) {
    return derive_seed(seed, 0x7461726765740000ULL, static_cast<std::uint64_t>(k));
}

[[noreturn]] inline void rethrow_with_context(const SimError& e, const std::string& ctx) {
    throw SimError(ctx + ": " + e.what(), e.exit_code());
}

inline std::uint64_t round_up(std::uint64_t n, std::uint64_t mult) {
    return ((n + mult - 1) / mult) * mult;
}

} // namespace detail

/// ---------------------------------------------------------------- estimate

struct EstimateRow {
    int target_class = 0;
    double p = 0.0;
    std::string method; // alg1 | naive
    double gamma_max = 0.0;
    bool gamma_auto = false;    // discovered by the adoption heuristic
    int ce_iterations = 0;
    TiltedRates rates;          // identity for the naive row
    bool has_rates = false;
    QuantileReport report;
    double switched_fraction = 0.0;
    PhaseTimings timings;
};

struct EstimateResult {
    std::vector<EstimateRow> rows;
};

inline EstimateRow estimate_one_target(const ExperimentConfig& cfg, const SlaTarget& target) {
    const int k = target.target_class;
    const std::uint64_t sk = detail::target_seed(cfg.seed, k);
    const EngineOptions opt{cfg.max_events_per_cycle};
    EstimateRow row;
    row.target_class = k;
    row.p = target.p;
    row.method = "alg1";

    auto t0 = detail::Clock::now();
    auto den_cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                      phase::denominator, 0, cfg.m2, cfg.workers, opt);
    row.timings.denominator = detail::seconds_since(t0);

    t0 = detail::Clock::now();
    CEResult ce = run_ce(cfg.model, target, cfg.ce,
                         ParallelSource{cfg.model, sk, cfg.workers, opt});
    row.timings.ce = detail::seconds_since(t0);
    row.gamma_max = ce.gamma_max;
    row.gamma_auto = ce.adopted_by_heuristic;
    row.ce_iterations = ce.iterations;
    row.rates = ce.rates;
    row.has_rates = true;

    t0 = detail::Clock::now();
    auto is_cycles = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), sk,
                                     phase::production, 0, cfg.m1, cfg.workers, opt);
    row.report = batch_ci(is_cycles, den_cycles, k, target.p, cfg.batches);
    std::uint64_t switched = 0;
    for (const auto& c : is_cycles)
        if (c.switched) ++switched;
    row.switched_fraction = static_cast<double>(switched) / static_cast<double>(cfg.m1);
    row.timings.production = detail::seconds_since(t0);
    return row;
}

inline EstimateRow estimate_naive_target(const ExperimentConfig& cfg, const SlaTarget& target) {
    const int k = target.target_class;
    const std::uint64_t sk = derive_seed(detail::target_seed(cfg.seed, k), 0x6e61697665ULL);
    const EngineOptions opt{cfg.max_events_per_cycle};
    EstimateRow row;
    row.target_class = k;
    row.p = target.p;
    row.method = "naive";
    auto t0 = detail::Clock::now();
    auto cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                  phase::production, 0, cfg.m1, cfg.workers, opt);
    row.report = batch_ci(cycles, cycles, k, target.p, cfg.batches);
    row.timings.production = detail::seconds_since(t0);
    return row;
}

inline EstimateResult run_estimate(const ExperimentConfig& cfg) {
    EstimateResult res;
    for (const SlaTarget& target : cfg.targets) {
        try {
            res.rows.push_back(estimate_one_target(cfg, target));
            if (cfg.baseline.kind == BaselineKind::naive)
                res.rows.push_back(estimate_naive_target(cfg, target));
        } catch (const SimError& e) {
            detail::rethrow_with_context(
                e, "estimate target class " + std::to_string(target.target_class));
        }
    }
    return res;
}

/// --------------------------------------------------------------- benchmark

struct BenchmarkRow {
    int target_class = 0;
    double p = 0.0;
    std::string method; // alg1 | naive | static
    double reference = 0.0;
    std::uint64_t m1 = 0, m2 = 0;
    int replications = 0;
    int resolved = 0; // replications whose sample actually resolves the level
    double mean_q = std::numeric_limits<double>::quiet_NaN();
    double var_q = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double gamma_max = std::numeric_limits<double>::quiet_NaN();
    int ce_iterations = 0;
    TiltedRates rates;
    bool has_rates = false;
    double seconds = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
};

namespace detail {

struct RepOutcome {
    double q;
    double lo, hi;
    bool resolved;
};

template <class RunRep>
inline void fill_benchmark_stats(BenchmarkRow& row, int reps, RunRep&& run_rep) {
    std::vector<RepOutcome> outcomes;
    outcomes.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) outcomes.push_back(run_rep(rep));
    double sum = 0.0, sum_sq_err = 0.0;
    int covered = 0, resolved = 0;
    for (const auto& o : outcomes) {
        if (!o.resolved) continue;
        ++resolved;
        sum += o.q;
        sum_sq_err += (o.q - row.reference) * (o.q - row.reference);
        if (o.lo <= row.reference && row.reference <= o.hi) ++covered;
    }
    row.replications = reps;
    row.resolved = resolved;
    if (resolved > 0) {
        row.mean_q = sum / resolved;
        row.mse = sum_sq_err / resolved;
        row.coverage = static_cast<double>(covered) / resolved;
        double ss = 0.0;
        for (const auto& o : outcomes)
            if (o.resolved) ss += (o.q - row.mean_q) * (o.q - row.mean_q);
        row.var_q = resolved > 1 ? ss / (resolved - 1) : 0.0;
    }
}

} // namespace detail

inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
    BenchmarkResult res;
    const EngineOptions opt{cfg.max_events_per_cycle};
    for (const SlaTarget& target : cfg.targets) {
        const int k = target.target_class;
        double ref;
        if (auto it = cfg.reference.find(k); it != cfg.reference.end()) {
            ref = it->second;
        } else if (cfg.model.num_classes() == 1) {
            ref = mm1_sojourn_quantile(cfg.model.lambda[0], cfg.model.mu[0], target.p);
        } else {
            throw ConfigError("benchmark needs reference[" + std::to_string(k) +
                              "] for a multi-class model");
        }
        const std::uint64_t sk = detail::target_seed(cfg.seed, k);

        CEResult ce;
        double ce_seconds = 0.0;
        {
            auto t0 = detail::Clock::now();
            try {
                ce = run_ce(cfg.model, target, cfg.ce,
                            ParallelSource{cfg.model, sk, cfg.workers, opt});
            } catch (const SimError& e) {
                detail::rethrow_with_context(e, "benchmark CE for class " + std::to_string(k));
            }
            ce_seconds = detail::seconds_since(t0);
        }

        auto make_row = [&](const std::string& method) {
            BenchmarkRow row;
            row.target_class = k;
            row.p = target.p;
            row.method = method;
            row.reference = ref;
            row.m1 = cfg.m1;
            row.m2 = cfg.m2;
            return row;
        };

        // Algorithm 1: CE-tilted IS with switching, fresh naive denominators
        {
            BenchmarkRow row = make_row("alg1");
            row.gamma_max = ce.gamma_max;
            row.ce_iterations = ce.iterations;
            row.rates = ce.rates;
            row.has_rates = true;
            auto t0 = detail::Clock::now();
            detail::fill_benchmark_stats(row, cfg.replications, [&](int rep) {
                const std::uint64_t rs = derive_seed(sk, 1, static_cast<std::uint64_t>(rep));
                auto is = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), rs,
                                          phase::production, 0, cfg.m1, cfg.workers, opt);
                auto den = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), rs,
                                           phase::denominator, 0, cfg.m2, cfg.workers, opt);
                QuantileReport qr = batch_ci(is, den, k, target.p, cfg.batches);
                return detail::RepOutcome{qr.q_hat, qr.ci_low, qr.ci_high, qr.resolved};
            });
            row.seconds = detail::seconds_since(t0) + ce_seconds;
            res.rows.push_back(row);
        }

        // Naive: plain regenerative estimate, the same cycles on both sides
        {
            BenchmarkRow row = make_row("naive");
            auto t0 = detail::Clock::now();
            detail::fill_benchmark_stats(row, cfg.replications, [&](int rep) {
                const std::uint64_t rs = derive_seed(sk, 2, static_cast<std::uint64_t>(rep));
                auto cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), rs,
                                              phase::production, 0, cfg.m1, cfg.workers, opt);
                QuantileReport qr = batch_ci(cycles, cycles, k, target.p, cfg.batches);
                return detail::RepOutcome{qr.q_hat, qr.ci_low, qr.ci_high, qr.resolved};
            });
            row.seconds = detail::seconds_since(t0);
            res.rows.push_back(row);
        }

        // Static tilt baseline, switching at the level Algorithm 1 adopted
        if (cfg.baseline.kind == BaselineKind::static_tilt) {
            BenchmarkRow row = make_row("static");
            TiltedRates tilt{cfg.baseline.lambda_tilde, cfg.baseline.mu_tilde, k, ce.gamma_max};
            validate(cfg.model, tilt);
            row.gamma_max = ce.gamma_max;
            row.rates = tilt;
            row.has_rates = true;
            auto t0 = detail::Clock::now();
            detail::fill_benchmark_stats(row, cfg.replications, [&](int rep) {
                const std::uint64_t rs = derive_seed(sk, 3, static_cast<std::uint64_t>(rep));
                auto is = simulate_cycles(cfg.model, SamplingPolicy::switching(tilt), rs,
                                          phase::production, 0, cfg.m1, cfg.workers, opt);
                auto den = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), rs,
                                           phase::denominator, 0, cfg.m2, cfg.workers, opt);
                QuantileReport qr = batch_ci(is, den, k, target.p, cfg.batches);
                return detail::RepOutcome{qr.q_hat, qr.ci_low, qr.ci_high, qr.resolved};
            });
            row.seconds = detail::seconds_since(t0);
            res.rows.push_back(row);
        }
    }
    return res;
}

/// --------------------------------------------------------- blocking profile

struct BlockingRow {
    std::string method; // naive | static | ce
    std::uint64_t cycles = 0;
    std::uint64_t effective_cycles = 0;  // >= 1 long-delayed class-1 job
    std::uint64_t long_delayed_jobs = 0;
    std::vector<double> pred_frac;       // first long-delayed job per cycle: class served before it
    std::vector<double> job_pred_frac;   // same mix over every long-delayed job
    std::uint64_t pred_none = 0;
    std::uint64_t job_pred_none = 0;
    TiltedRates rates;
    bool has_rates = false;
    int ce_iterations = 0;
    double seconds = 0.0;
};

struct BlockingResult {
    double gamma = 0.0;
    std::vector<BlockingRow> rows;
};

namespace detail {

constexpr int blocking_max_classes = 8;

struct BlockingPayload {
    std::uint32_t pred[blocking_max_classes + 1] = {};
    std::uint32_t job[blocking_max_classes + 1] = {};
    std::uint8_t effective = 0;
    std::uint8_t switched = 0;
};

inline BlockingPayload blocking_scan(const CycleRecord& cycle, double gamma) {
    BlockingPayload p;
    p.switched = cycle.switched ? 1 : 0;
    const auto& jobs = cycle.jobs;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        const JobRecord& job = jobs[idx];
        if (job.job_class != 1 || !(job.response_time > gamma)) continue;
        const int cls = idx > 0 ? jobs[idx - 1].job_class : 0;
        if (!p.effective) ++p.pred[cls]; // who blocked the cycle's first long delay
        p.effective = 1;
        ++p.job[cls];
    }
    return p;
}

} // namespace detail

inline BlockingResult run_blocking_profile(const ExperimentConfig& cfg) {
    const int K = cfg.model.num_classes();
    if (K > detail::blocking_max_classes)
        throw ConfigError("blocking profile supports at most " +
                          std::to_string(detail::blocking_max_classes) + " classes");
    const double gamma = cfg.blocking.gamma;
    if (!(gamma >= 0.0)) throw ConfigError("blocking.gamma must be set and non-negative");
    const EngineOptions opt{cfg.max_events_per_cycle};
    BlockingResult res;
    res.gamma = gamma;

    struct Method {
        std::string name;
        SamplingPolicy policy;
        TiltedRates rates;
        bool has_rates;
        int ce_iterations;
    };
    std::vector<Method> methods;
    methods.push_back({"naive", SamplingPolicy::true_measure(), {}, false, 0});
    if (cfg.baseline.kind == BaselineKind::static_tilt) {
        TiltedRates tilt{cfg.baseline.lambda_tilde, cfg.baseline.mu_tilde, 1, gamma};
        validate(cfg.model, tilt);
        methods.push_back({"static", SamplingPolicy::switching(tilt), tilt, true, 0});
    }
    if (gamma == 0.0) {
        // the conditioning event is almost sure; the optimal tilt is no tilt
        TiltedRates ident{cfg.model.lambda, cfg.model.mu, 1, gamma};
        methods.push_back({"ce", SamplingPolicy::switching(ident), ident, true, 0});
    } else {
        const std::uint64_t sk = derive_seed(cfg.seed, 0x626c6f636b696e67ULL);
        SlaTarget t{1, cfg.targets.empty() ? 0.999 : cfg.targets.front().p, gamma};
        CEResult ce;
        try {
            ce = run_ce(cfg.model, t, cfg.ce, ParallelSource{cfg.model, sk, cfg.workers, opt});
        } catch (const SimError& e) {
            detail::rethrow_with_context(e, "blocking profile CE");
        }
        methods.push_back(
            {"ce", SamplingPolicy::switching(ce.rates), ce.rates, true, ce.iterations});
    }

    int method_id = 0;
    for (const Method& m : methods) {
        auto t0 = detail::Clock::now();
        auto payloads = map_cycles<detail::BlockingPayload>(
            cfg.model, m.policy, derive_seed(cfg.seed, 0x70726f66ULL, method_id), phase::profile,
            0, cfg.blocking.cycles, cfg.workers, opt,
            [&](std::uint64_t, CycleRecord&& c) { return detail::blocking_scan(c, gamma); });
        ++method_id;

        BlockingRow row;
        row.method = m.name;
        row.cycles = cfg.blocking.cycles;
        row.rates = m.rates;
        row.has_rates = m.has_rates;
        row.ce_iterations = m.ce_iterations;
        std::uint64_t pred[detail::blocking_max_classes + 1] = {};
        std::uint64_t job[detail::blocking_max_classes + 1] = {};
        for (const auto& p : payloads) {
            row.effective_cycles += p.effective;
            for (int c = 0; c <= K; ++c) {
                pred[c] += p.pred[c];
                job[c] += p.job[c];
            }
        }
        std::uint64_t total_pred = 0, total_job = 0;
        for (int c = 1; c <= K; ++c) {
            total_pred += pred[c];
            total_job += job[c];
            row.long_delayed_jobs += job[c];
        }
        row.long_delayed_jobs += job[0];
        row.pred_none = pred[0];
        row.job_pred_none = job[0];
        row.pred_frac.resize(K, 0.0);
        row.job_pred_frac.resize(K, 0.0);
        for (int c = 1; c <= K; ++c) {
            if (total_pred) row.pred_frac[c - 1] = static_cast<double>(pred[c]) / total_pred;
            if (total_job) row.job_pred_frac[c - 1] = static_cast<double>(job[c]) / total_job;
        }
        row.seconds = detail::seconds_since(t0);
        res.rows.push_back(std::move(row));
    }
    return res;
}

/// --------------------------------------------------------------------- sla

struct SlaRow {
    int target_class = 0;
    double p = 0.0;
    double gamma_max = 0.0;
    bool gamma_auto = false;
    int ce_iterations = 0;
    TiltedRates rates;
    std::uint64_t presim_cycles = 0;
    QuantileReport presim;
    std::uint64_t m = 0; // sized production cycle count
    bool capped = false;
    QuantileReport production;
    TailReport validation;
    PhaseTimings timings;
};

struct SlaResult {
    std::vector<SlaRow> rows;
};

inline SlaRow sla_one_target(const ExperimentConfig& cfg, const SlaTarget& target) {
    const int k = target.target_class;
    const std::uint64_t sk = detail::target_seed(cfg.seed, k);
    const EngineOptions opt{cfg.max_events_per_cycle};
    const std::uint64_t r = static_cast<std::uint64_t>(cfg.batches);
    SlaRow row;
    row.target_class = k;
    row.p = target.p;

    auto t0 = detail::Clock::now();
    CEResult ce = run_ce(cfg.model, target, cfg.ce,
                         ParallelSource{cfg.model, sk, cfg.workers, opt});
    row.timings.ce = detail::seconds_since(t0);
    row.gamma_max = ce.gamma_max;
    row.gamma_auto = ce.adopted_by_heuristic;
    row.ce_iterations = ce.iterations;
    row.rates = ce.rates;

    // pilot run for sizing
    t0 = detail::Clock::now();
    const std::uint64_t m0 = detail::round_up(cfg.sla.presim_cycles, r);
    row.presim_cycles = m0;
    auto pilot_is = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), sk,
                                    phase::presim, 1, m0, cfg.workers, opt);
    auto pilot_den = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                     phase::presim, 2, m0, cfg.workers, opt);
    row.presim = batch_ci(pilot_is, pilot_den, k, target.p, cfg.batches);
    std::uint64_t m = required_cycles(row.presim, cfg.sla.target_relative_error, cfg.batches);
    if (m > cfg.sla.max_cycles) {
        m = detail::round_up(cfg.sla.max_cycles, r);
        row.capped = true;
    }
    row.m = m;

    t0 = detail::Clock::now();
    auto is_cycles = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), sk,
                                     phase::production, 0, m, cfg.workers, opt);
    row.timings.production = detail::seconds_since(t0);
    t0 = detail::Clock::now();
    auto den_cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                      phase::denominator, 0, m, cfg.workers, opt);
    row.timings.denominator = detail::seconds_since(t0);
    row.production = batch_ci(is_cycles, den_cycles, k, target.p, cfg.batches);

    // independent validation of the tail probability at the reported quantile
    t0 = detail::Clock::now();
    const std::uint64_t mv = detail::round_up(cfg.sla.validation_cycles, r);
    auto val_is = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), sk,
                                  phase::validation_is, 0, mv, cfg.workers, opt);
    auto val_den = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                   phase::validation_naive, 0, mv, cfg.workers, opt);
    row.validation =
        tail_probability_ci(val_is, val_den, k, row.production.q_hat, cfg.batches);
    row.timings.validation = detail::seconds_since(t0);
    return row;
}

inline SlaResult run_sla(const ExperimentConfig& cfg) {
    SlaResult res;
    for (const SlaTarget& target : cfg.targets) {
        try {
            res.rows.push_back(sla_one_target(cfg, target));
        } catch (const SimError& e) {
            detail::rethrow_with_context(e,
                                         "sla target class " + std::to_string(target.target_class));
        }
    }
    return res;
}

/// --------------------------------------------------------------- ce-search

struct CESearchResult {
    std::vector<std::pair<SlaTarget, CEResult>> runs;
};

inline CESearchResult run_ce_search(const ExperimentConfig& cfg) {
    CESearchResult res;
    const EngineOptions opt{cfg.max_events_per_cycle};
    for (const SlaTarget& target : cfg.targets) {
        const std::uint64_t sk = detail::target_seed(cfg.seed, target.target_class);
        try {
            auto t0 = detail::Clock::now();
            CEResult ce = run_ce(cfg.model, target, cfg.ce,
                                 ParallelSource{cfg.model, sk, cfg.workers, opt});
            // per-iteration wall time is not tracked inside run_ce; record the
            // average so the history is still informative
            const double avg = detail::seconds_since(t0) / ce.iterations;
            for (auto& it : ce.history) it.seconds = avg;
            res.runs.emplace_back(target, std::move(ce));
        } catch (const SimError& e) {
            detail::rethrow_with_context(
                e, "ce-search target class " + std::to_string(target.target_class));
        }
    }
    return res;
}

/// ---------------------------------------------------------------- validate

struct ValidateRow {
    int target_class = 0;
    double gamma = 0.0;
    std::string method; // alg1 | naive
    TailReport tail;
    TiltedRates rates;
    bool has_rates = false;
    int ce_iterations = 0;
    PhaseTimings timings;
};

struct ValidateResult {
    std::vector<ValidateRow> rows;
};

inline ValidateResult run_validate(const ExperimentConfig& cfg, double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("validate needs a positive gamma");
    ValidateResult res;
    const EngineOptions opt{cfg.max_events_per_cycle};
    for (const SlaTarget& target : cfg.targets) {
        const int k = target.target_class;
        const std::uint64_t sk = detail::target_seed(cfg.seed, k);
        try {
            SlaTarget bounded = target;
            bounded.gamma_max = gamma;
            ValidateRow row;
            row.target_class = k;
            row.gamma = gamma;
            row.method = "alg1";
            auto t0 = detail::Clock::now();
            CEResult ce = run_ce(cfg.model, bounded, cfg.ce,
                                 ParallelSource{cfg.model, sk, cfg.workers, opt});
            row.timings.ce = detail::seconds_since(t0);
            row.rates = ce.rates;
            row.has_rates = true;
            row.ce_iterations = ce.iterations;
            t0 = detail::Clock::now();
            auto is_cycles = simulate_cycles(cfg.model, SamplingPolicy::switching(ce.rates), sk,
                                             phase::validation_is, 0, cfg.m1, cfg.workers, opt);
            auto den_cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(), sk,
                                              phase::validation_naive, 0, cfg.m2, cfg.workers,
                                              opt);
            row.tail = tail_probability_ci(is_cycles, den_cycles, k, gamma, cfg.batches);
            row.timings.validation = detail::seconds_since(t0);
            res.rows.push_back(row);

            if (cfg.baseline.kind == BaselineKind::naive) {
                ValidateRow nrow;
                nrow.target_class = k;
                nrow.gamma = gamma;
                nrow.method = "naive";
                t0 = detail::Clock::now();
                auto cycles = simulate_cycles(cfg.model, SamplingPolicy::true_measure(),
                                              derive_seed(sk, 0x6e76ULL), phase::validation_naive,
                                              1, cfg.m1, cfg.workers, opt);
                nrow.tail = tail_probability_ci(cycles, cycles, k, gamma, cfg.batches);
                nrow.timings.validation = detail::seconds_since(t0);
                res.rows.push_back(nrow);
            }
        } catch (const SimError& e) {
            detail::rethrow_with_context(e, "validate target class " + std::to_string(k));
        }
    }
    return res;
}

} // namespace pqtail
