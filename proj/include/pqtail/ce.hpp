#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqtail/engine.hpp"
#include "pqtail/errors.hpp"
#include "pqtail/estimate.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"
#include "pqtail/rng.hpp"

namespace pqtail {

struct CEConfig {
    std::uint64_t cycles_per_iteration = 10000;
    double elite_fraction = 0.1;
    int max_iterations = 50;
    int stall_limit = 5;            // consecutive non-increasing levels tolerated
    std::uint64_t pilot_cycles = 10000; // per-iteration pilot when gamma_max is unknown
    int pilot_batches = 20;             // divides pilot_cycles
    double smoothing = 1.0;             // 1 = no smoothing
};

inline void validate(const CEConfig& cfg) {
    if (cfg.cycles_per_iteration < 1) throw ConfigError("CE needs at least one cycle per iteration");
    if (!(cfg.elite_fraction > 0.0) || !(cfg.elite_fraction < 1.0))
        throw ConfigError("elite fraction must lie strictly between 0 and 1");
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (cfg.stall_limit < 1) throw ConfigError("stall_limit must be >= 1");
    if (cfg.pilot_batches < 2 || cfg.pilot_cycles % cfg.pilot_batches != 0)
        throw ConfigError("pilot_cycles must divide evenly into pilot_batches >= 2");
    if (!(cfg.smoothing > 0.0) || cfg.smoothing > 1.0)
        throw ConfigError("smoothing must lie in (0, 1]");
}

namespace detail {

inline std::vector<double> cycle_maxima(std::span<const CycleRecord> cycles, int k) {
    std::vector<double> maxima(cycles.size(), 0.0);
    for (std::size_t i = 0; i < cycles.size(); ++i)
        for (const JobRecord& job : cycles[i].jobs)
            if (job.job_class == k && job.response_time > maxima[i])
                maxima[i] = job.response_time;
    return maxima;
}

/// Upper order statistic at 0-based index ceil((1-rho)*n) of the sorted
/// maxima; cycles without a target job count as 0.
inline double level_of_maxima(std::vector<double> maxima, double rho, double cap) {
    std::sort(maxima.begin(), maxima.end());
    if (maxima.empty() || maxima.back() <= 0.0)
        throw NoTargetJobs("no target-class job in any cycle");
    const double pos = std::ceil((1.0 - rho) * static_cast<double>(maxima.size()));
    std::size_t idx = static_cast<std::size_t>(pos);
    if (idx >= maxima.size()) idx = maxima.size() - 1;
    return std::min(maxima[idx], cap);
}

} // namespace detail

/// Empirical (1-rho)-quantile of the per-cycle maximum target-class response,
/// capped at gamma_cap.
inline double adaptive_level(std::span<const CycleRecord> cycles, int k, double rho,
                             double gamma_cap = std::numeric_limits<double>::infinity()) {
    return detail::level_of_maxima(detail::cycle_maxima(cycles, k), rho, gamma_cap);
}

/// Closed-form cross-entropy update of the tilted rates from one batch of
/// cycles with full likelihood bookkeeping. Per cycle the weight is
/// W_i = sum over target-class jobs of L(entry) * 1{response > gamma}; the new
/// arrival rate per class is the W-weighted arrival count over the W-weighted
/// arrival exposure (realized gaps plus the unfinished age), both stopped at
/// the switch. Service rates use arrived counts over attached service mass for
/// classes at or above the target priority, entered counts over entered
/// service mass below it.
inline TiltedRates ce_update(std::span<const CycleRecord> cycles, int k, double gamma) {
    if (cycles.empty()) throw DegenerateElite("no cycles to update from");
    const int K = static_cast<int>(cycles.front().count_by_class.size());
    std::vector<KahanSum> arr_num(K), arr_den(K), svc_num(K), svc_den(K);
    KahanSum total_weight;
    for (const CycleRecord& c : cycles) {
        double w = 0.0;
        for (const JobRecord& job : c.jobs)
            if (job.job_class == k && job.response_time > gamma)
                w += std::exp(job.log_likelihood);
        if (w == 0.0) continue;
        total_weight.add(w);
        for (int l = 0; l < K; ++l) {
            arr_num[l].add(w * c.stopped.arrivals[l]);
            arr_den[l].add(w * (c.stopped.interarrival_sum[l] + c.stopped.arrival_age[l]));
            if (l + 1 <= k) {
                svc_num[l].add(w * c.stopped.arrivals[l]);
                svc_den[l].add(w * c.stopped.service_arrived_sum[l]);
            } else {
                svc_num[l].add(w * c.stopped.service_entries[l]);
                svc_den[l].add(w * c.stopped.service_entered_sum[l]);
            }
        }
    }
    if (total_weight.value() == 0.0)
        throw DegenerateElite("no target-class response above the level");
    TiltedRates out;
    out.target_class = k;
    out.lambda_tilde.resize(K);
    out.mu_tilde.resize(K);
    for (int l = 0; l < K; ++l) {
        if (arr_den[l].value() <= 0.0)
            throw DegenerateElite("zero arrival exposure for class " + std::to_string(l + 1));
        if (svc_den[l].value() <= 0.0)
            throw DegenerateElite("zero service exposure for class " + std::to_string(l + 1));
        out.lambda_tilde[l] = arr_num[l].value() / arr_den[l].value();
        out.mu_tilde[l] = svc_num[l].value() / svc_den[l].value();
    }
    return out;
}

/// One accepted CE iteration.
struct CEIteration {
    int t = 0;
    double gamma = 0.0;
    TiltedRates rates;
    std::uint64_t elite_cycles = 0;
    double seconds = 0.0;
};

struct CEResult {
    TiltedRates rates;       // gamma_max and target_class filled in
    double gamma_max = 0.0;
    int iterations = 0;
    bool adopted_by_heuristic = false;
    std::vector<CEIteration> history;
};

/// Remark-style adoption rule: take gamma_t as the working upper bound once
/// it clears the pilot CI of the quantile estimate.
inline bool adopt_gamma_max(double gamma_t, const QuantileReport& pilot) {
    return gamma_t > pilot.ci_high;
}

/// Adaptive two-stage search. `source(policy, phase, sub, count)` must return
/// `count` fresh cycles simulated under `policy`; sub keys the iteration so
/// every batch draws from its own stream family.
///
/// When the target carries a known gamma_max, iterations simulate with
/// switching at gamma_max and stop once the adaptive level reaches it. With
/// gamma_max unknown, the first iteration runs the identity tilt unswitched;
/// later iterations switch at the previous level (a supercritical tilt would
/// otherwise never regenerate) and after each update a small pilot run
/// estimates the p-quantile, adopting gamma_t as the bound the first time it
/// clears the pilot CI.
template <class Source>
    requires std::invocable<Source&, const SamplingPolicy&, std::uint64_t, std::uint64_t,
                            std::uint64_t>
CEResult run_ce(const ModelParams& params, const SlaTarget& target, const CEConfig& cfg,
                Source&& source) {
    validate(params);
    validate(params, target);
    validate(cfg);
    const int k = target.target_class;
    const bool known = target.gamma_max.has_value();
    const double cap = known ? *target.gamma_max : std::numeric_limits<double>::infinity();

    CEResult res;
    TiltedRates current{params.lambda, params.mu, k,
                        std::numeric_limits<double>::infinity()};
    double gamma_prev = 0.0;
    int stall = 0;
    std::vector<CycleRecord> pilot_naive; // cached across iterations

    for (int t = 1; t <= cfg.max_iterations; ++t) {
        current.gamma_max = known ? cap
                                  : (t == 1 ? std::numeric_limits<double>::infinity()
                                            : gamma_prev);
        auto cycles = source(SamplingPolicy::switching(current), phase::ce_iteration,
                             static_cast<std::uint64_t>(t), cfg.cycles_per_iteration);
        std::vector<double> maxima = detail::cycle_maxima(cycles, k);
        double gamma_t =
            std::max(detail::level_of_maxima(maxima, cfg.elite_fraction, cap), gamma_prev);

        TiltedRates next;
        try {
            next = ce_update(cycles, k, gamma_t);
        } catch (const DegenerateElite&) {
            // one self-repair attempt at the median level
            double med = detail::level_of_maxima(maxima, 0.5, cap);
            med = std::min(std::max(med, gamma_prev), gamma_t);
            if (med == gamma_t) throw;
            next = ce_update(cycles, k, med);
            gamma_t = med;
        }
        if (cfg.smoothing < 1.0) {
            for (int l = 0; l < params.num_classes(); ++l) {
                next.lambda_tilde[l] = cfg.smoothing * next.lambda_tilde[l] +
                                       (1.0 - cfg.smoothing) * current.lambda_tilde[l];
                next.mu_tilde[l] = cfg.smoothing * next.mu_tilde[l] +
                                   (1.0 - cfg.smoothing) * current.mu_tilde[l];
            }
        }
        std::uint64_t elite = 0;
        for (double v : maxima)
            if (v > gamma_t) ++elite;
        res.history.push_back({t, gamma_t, next, elite, 0.0});
        res.iterations = t;

        if (known && gamma_t >= cap) {
            next.gamma_max = cap;
            res.rates = next;
            res.gamma_max = cap;
            return res;
        }

        if (!known) {
            TiltedRates pilot_rates = next;
            pilot_rates.gamma_max = gamma_t;
            auto pilot_is = source(SamplingPolicy::switching(pilot_rates),
                                   phase::ce_pilot_is, static_cast<std::uint64_t>(t),
                                   cfg.pilot_cycles);
            if (pilot_naive.empty())
                pilot_naive = source(SamplingPolicy::true_measure(), phase::ce_pilot_naive,
                                     0, cfg.pilot_cycles);
            try {
                QuantileReport pilot =
                    batch_ci(pilot_is, pilot_naive, k, target.p, cfg.pilot_batches);
                if (adopt_gamma_max(gamma_t, pilot)) {
                    next.gamma_max = gamma_t;
                    res.rates = next;
                    res.gamma_max = gamma_t;
                    res.adopted_by_heuristic = true;
                    return res;
                }
            } catch (const StatError&) {
                // pilot could not form an estimate yet; keep searching
            }
        }

        if (gamma_t <= gamma_prev) {
            if (++stall >= cfg.stall_limit)
                throw NoProgress("adaptive level stuck at " + std::to_string(gamma_t) +
                                 " for " + std::to_string(stall) + " iterations");
        } else {
            stall = 0;
        }
        gamma_prev = gamma_t;
        current = next;
    }
    throw IterationCap("cross-entropy search did not reach the target level in " +
                       std::to_string(cfg.max_iterations) + " iterations");
}

/// Single-threaded convenience wrapper: streams derive from (seed, phase,
/// sub, cycle index).
inline CEResult run_ce(const ModelParams& params, const SlaTarget& target, const CEConfig& cfg,
                       std::uint64_t seed,
                       const EngineOptions& opt = {}) {
    auto source = [&](const SamplingPolicy& policy, std::uint64_t phase_tag, std::uint64_t sub,
                      std::uint64_t count) {
        std::vector<CycleRecord> cycles;
        cycles.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Xoshiro256 rng = make_stream(seed, phase_tag, sub, i);
            cycles.push_back(simulate_cycle(params, policy, rng, opt));
        }
        return cycles;
    };
    return run_ce(params, target, cfg, source);
}

} // namespace pqtail
