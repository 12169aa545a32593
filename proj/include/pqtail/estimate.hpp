#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pqtail/engine.hpp"
#include "pqtail/errors.hpp"

namespace pqtail {

/// Compensated summation; likelihood weights span many orders of magnitude.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/// One pooled (response, likelihood weight) observation of the target class.
struct WeightedEntry {
    double response = 0.0;
    double weight = 0.0;
    std::uint32_t cycle_index = 0;
    std::uint32_t order = 0; // service order within the cycle
};

/// All target-class observations of m1 cycles, sorted ascending by response
/// (ties broken by cycle index, then service order, for determinism).
struct WeightedSample {
    std::vector<WeightedEntry> entries;
    std::uint64_t m1 = 0;
    int target_class = 0;
    std::uint64_t beta() const { return entries.size(); }
};

inline WeightedSample make_weighted_sample(std::span<const CycleRecord> cycles, int k) {
    WeightedSample ws;
    ws.m1 = cycles.size();
    ws.target_class = k;
    for (std::uint32_t i = 0; i < cycles.size(); ++i) {
        std::uint32_t order = 0;
        for (const JobRecord& job : cycles[i].jobs) {
            if (job.job_class == k)
                ws.entries.push_back({job.response_time, std::exp(job.log_likelihood), i, order});
            ++order;
        }
    }
    std::sort(ws.entries.begin(), ws.entries.end(),
              [](const WeightedEntry& a, const WeightedEntry& b) {
                  if (a.response != b.response) return a.response < b.response;
                  if (a.cycle_index != b.cycle_index) return a.cycle_index < b.cycle_index;
                  return a.order < b.order;
              });
    return ws;
}

/// Plain (unweighted) estimate of the mean number of target-class jobs per
/// cycle, from cycles simulated under the true measure.
struct DenominatorEstimate {
    std::uint64_t m2 = 0;
    std::uint64_t sum_alpha_k = 0;
    double mean_alpha_k = 0.0;
};

inline DenominatorEstimate make_denominator(std::span<const CycleRecord> cycles, int k) {
    DenominatorEstimate den;
    den.m2 = cycles.size();
    for (const CycleRecord& c : cycles) den.sum_alpha_k += c.count_by_class[k - 1];
    den.mean_alpha_k = den.m2 ? static_cast<double>(den.sum_alpha_k) / den.m2 : 0.0;
    return den;
}

/// Ratio estimator of P(R_inf > gamma) for the sample's target class: the
/// likelihood-weighted count of responses above gamma per IS cycle, divided
/// by the naive mean number of jobs per cycle.
inline double tail_probability(const WeightedSample& ws, const DenominatorEstimate& den,
                               double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("tail level gamma must be non-negative");
    if (ws.m1 == 0) throw EmptySample("tail probability needs at least one cycle");
    if (den.sum_alpha_k == 0)
        throw EmptyDenominator("no target-class jobs in the denominator sample");
    auto it = std::upper_bound(ws.entries.begin(), ws.entries.end(), gamma,
                               [](double g, const WeightedEntry& e) { return g < e.response; });
    KahanSum num;
    for (; it != ws.entries.end(); ++it) num.add(it->weight);
    return (num.value() / static_cast<double>(ws.m1)) / den.mean_alpha_k;
}

namespace detail {

inline double quantile_threshold(const WeightedSample& ws, const DenominatorEstimate& den,
                                 double p) {
    return (1.0 - p) * (static_cast<double>(ws.m1) / static_cast<double>(den.m2)) *
           static_cast<double>(den.sum_alpha_k);
}

inline std::vector<double> suffix_weights(const WeightedSample& ws) {
    const std::size_t beta = ws.entries.size();
    std::vector<double> suffix(beta + 1, 0.0);
    KahanSum acc;
    for (std::size_t i = beta; i-- > 0;) {
        acc.add(ws.entries[i].weight);
        suffix[i] = acc.value();
    }
    return suffix;
}

} // namespace detail

/// Weighted order-statistic estimate of the p-quantile: the smallest sorted
/// response whose strictly-above weight mass drops below the threshold
/// (1-p) * (m1/m2) * sum_alpha_k. This is exactly
/// inf{gamma : tail_probability(gamma) < 1-p} restricted to sample points.
inline double quantile(const WeightedSample& ws, const DenominatorEstimate& den, double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw ConfigError("p must lie strictly between 0 and 1");
    if (ws.entries.empty()) throw EmptySample("quantile of an empty sample");
    if (den.sum_alpha_k == 0)
        throw EmptyDenominator("no target-class jobs in the denominator sample");
    const double thr = detail::quantile_threshold(ws, den, p);
    if (!(thr > 0.0)) throw Unresolvable("non-positive quantile threshold");
    const std::vector<double> suffix = detail::suffix_weights(ws);
    // suffix is non-increasing and suffix[beta] = 0 < thr, so the scan always
    // lands on an entry.
    for (std::size_t i = 0; i < ws.entries.size(); ++i)
        if (suffix[i + 1] < thr) return ws.entries[i].response;
    throw Unresolvable("suffix scan failed"); // unreachable
}

/// Whether the sample can actually separate the level p from its own upper
/// tail: true when excluding the single largest response already drops the
/// suffix mass to the threshold or below. A false value means the returned
/// quantile is pinned to the sample maximum and carries no information (this
/// is how a naive run "fails" at extreme levels).
inline bool level_resolved(const WeightedSample& ws, const DenominatorEstimate& den, double p) {
    if (ws.entries.empty() || den.sum_alpha_k == 0) return false;
    return ws.entries.back().weight <= detail::quantile_threshold(ws, den, p);
}

/// Batch-means quantile confidence interval.
struct QuantileReport {
    double q_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double sigma_hat = 0.0;       // standard deviation of the r batch estimates
    double relative_error = 0.0;  // sigma_hat / q_hat
    int r = 0;
    std::uint64_t c1 = 0; // IS cycles per batch
    std::uint64_t c2 = 0; // naive cycles per batch
    std::uint64_t m1 = 0;
    std::uint64_t m2 = 0;
    std::uint64_t beta = 0;
    double p = 0.0;
    bool resolved = false;
};

/// Splits both cycle lists into r consecutive batches, estimates the quantile
/// per batch and over the full sample, and forms the 95% normal CI
/// q_hat +- 1.96 sigma_hat/sqrt(r), with sigma_hat the spread of the batch
/// estimates around the full-sample estimate.
inline QuantileReport batch_ci(std::span<const CycleRecord> cycles_is,
                               std::span<const CycleRecord> cycles_naive, int k, double p,
                               int r = 30) {
    if (r < 2) throw BatchTooSmall("need at least 2 batches");
    const std::uint64_t m1 = cycles_is.size();
    const std::uint64_t m2 = cycles_naive.size();
    if (m1 == 0 || m2 == 0) throw EmptySample("batch CI needs cycles on both sides");
    if (m1 % r != 0 || m2 % r != 0)
        throw BatchTooSmall("cycle counts must divide evenly into " + std::to_string(r) +
                            " batches");
    QuantileReport rep;
    rep.r = r;
    rep.m1 = m1;
    rep.m2 = m2;
    rep.c1 = m1 / r;
    rep.c2 = m2 / r;
    rep.p = p;

    const WeightedSample ws = make_weighted_sample(cycles_is, k);
    const DenominatorEstimate den = make_denominator(cycles_naive, k);
    rep.beta = ws.beta();
    rep.q_hat = quantile(ws, den, p);
    rep.resolved = level_resolved(ws, den, p);

    double ss = 0.0;
    for (int i = 0; i < r; ++i) {
        auto slice_is = cycles_is.subspan(i * rep.c1, rep.c1);
        auto slice_naive = cycles_naive.subspan(i * rep.c2, rep.c2);
        const WeightedSample wsb = make_weighted_sample(slice_is, k);
        if (wsb.entries.empty())
            throw BatchTooSmall("batch " + std::to_string(i + 1) + " has no target-class jobs");
        const DenominatorEstimate denb = make_denominator(slice_naive, k);
        if (denb.sum_alpha_k == 0)
            throw BatchTooSmall("batch " + std::to_string(i + 1) +
                                " has an empty denominator");
        const double qb = quantile(wsb, denb, p);
        ss += (qb - rep.q_hat) * (qb - rep.q_hat);
    }
    rep.sigma_hat = std::sqrt(ss / (r - 1));
    const double half = 1.96 * rep.sigma_hat / std::sqrt(static_cast<double>(r));
    rep.ci_low = rep.q_hat - half;
    rep.ci_high = rep.q_hat + half;
    rep.relative_error = rep.q_hat != 0.0 ? rep.sigma_hat / rep.q_hat : 0.0;
    return rep;
}

/// Batch-means CI for the tail probability at a fixed level.
struct TailReport {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double sigma_hat = 0.0;
    double relative_error = 0.0;
    int r = 0;
    std::uint64_t m1 = 0;
    std::uint64_t m2 = 0;
    double gamma = 0.0;
};

inline TailReport tail_probability_ci(std::span<const CycleRecord> cycles_is,
                                      std::span<const CycleRecord> cycles_naive, int k,
                                      double gamma, int r = 30) {
    if (r < 2) throw BatchTooSmall("need at least 2 batches");
    const std::uint64_t m1 = cycles_is.size();
    const std::uint64_t m2 = cycles_naive.size();
    if (m1 == 0 || m2 == 0) throw EmptySample("batch CI needs cycles on both sides");
    if (m1 % r != 0 || m2 % r != 0)
        throw BatchTooSmall("cycle counts must divide evenly into " + std::to_string(r) +
                            " batches");
    TailReport rep;
    rep.r = r;
    rep.m1 = m1;
    rep.m2 = m2;
    rep.gamma = gamma;
    const WeightedSample ws = make_weighted_sample(cycles_is, k);
    const DenominatorEstimate den = make_denominator(cycles_naive, k);
    rep.p_hat = tail_probability(ws, den, gamma);
    const std::uint64_t c1 = m1 / r, c2 = m2 / r;
    double ss = 0.0;
    for (int i = 0; i < r; ++i) {
        const WeightedSample wsb = make_weighted_sample(cycles_is.subspan(i * c1, c1), k);
        const DenominatorEstimate denb = make_denominator(cycles_naive.subspan(i * c2, c2), k);
        if (denb.sum_alpha_k == 0)
            throw BatchTooSmall("batch " + std::to_string(i + 1) +
                                " has an empty denominator");
        const double pb = tail_probability(wsb, denb, gamma);
        ss += (pb - rep.p_hat) * (pb - rep.p_hat);
    }
    rep.sigma_hat = std::sqrt(ss / (r - 1));
    const double half = 1.96 * rep.sigma_hat / std::sqrt(static_cast<double>(r));
    rep.ci_low = rep.p_hat - half;
    rep.ci_high = rep.p_hat + half;
    rep.relative_error = rep.p_hat != 0.0 ? rep.sigma_hat / rep.p_hat : 0.0;
    return rep;
}

/// Sample variance of the centered cycle statistic Z_i = Y_i - p_hat * a_i,
/// where Y_i is the weighted exceedance count of IS cycle i and a_i the
/// target-class job count of the index-aligned naive cycle. Diagnostic
/// counterpart of the CLT variance; the shipped CIs use batching instead.
inline double z_variance(std::span<const CycleRecord> cycles_is,
                         std::span<const CycleRecord> cycles_naive, int k, double gamma) {
    if (cycles_is.size() != cycles_naive.size())
        throw ConfigError("z_variance needs index-aligned samples (m1 = m2)");
    const std::size_t m = cycles_is.size();
    if (m < 2) throw EmptySample("z_variance needs at least two cycles");
    const WeightedSample ws = make_weighted_sample(cycles_is, k);
    const DenominatorEstimate den = make_denominator(cycles_naive, k);
    const double p_hat = tail_probability(ws, den, gamma);

    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) {
        double y = 0.0;
        for (const JobRecord& job : cycles_is[i].jobs)
            if (job.job_class == k && job.response_time > gamma)
                y += std::exp(job.log_likelihood);
        z[i] = y - p_hat * static_cast<double>(cycles_naive[i].count_by_class[k - 1]);
    }
    KahanSum mean_acc;
    for (double v : z) mean_acc.add(v);
    const double mean = mean_acc.value() / static_cast<double>(m);
    KahanSum ss;
    for (double v : z) ss.add((v - mean) * (v - mean));
    return ss.value() / static_cast<double>(m - 1);
}

/// Pilot-based sizing: scale the pilot's relative error by sqrt(m0/m) and
/// solve for the m that meets the target, rounded up to a multiple of r.
inline std::uint64_t required_cycles(const QuantileReport& pilot, double target_relative_error,
                                     int r = 30) {
    if (!(target_relative_error > 0.0)) throw ConfigError("target relative error must be > 0");
    if (pilot.q_hat <= 0.0 || pilot.m1 == 0) throw EmptySample("unusable pilot report");
    const double rel = pilot.sigma_hat / pilot.q_hat;
    const double ratio = rel / target_relative_error;
    double m = std::ceil(static_cast<double>(pilot.m1) * ratio * ratio);
    std::uint64_t rounded = static_cast<std::uint64_t>(m);
    const std::uint64_t rr = static_cast<std::uint64_t>(r);
    rounded = ((rounded + rr - 1) / rr) * rr;
    return std::max(rounded, rr);
}

} // namespace pqtail
