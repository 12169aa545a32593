#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pqtail/errors.hpp"
#include "pqtail/model.hpp"

namespace pqtail {

/// Exponential change of measure used while a cycle is "pushed" towards long
/// class-k delays. Arrival and service rates are replaced per class until the
/// switching time, after which the true dynamics resume. gamma_max is the
/// switching level: the tilt is abandoned as soon as an arriving class-k job
/// is guaranteed a response above it. An infinite gamma_max never switches.
struct TiltedRates {
    std::vector<double> lambda_tilde;
    std::vector<double> mu_tilde;
    int target_class = 1; // 1-based
    double gamma_max = std::numeric_limits<double>::infinity();
};

inline void validate(const ModelParams& params, const TiltedRates& tilt) {
    if (tilt.lambda_tilde.size() != params.lambda.size() ||
        tilt.mu_tilde.size() != params.mu.size())
        throw ConfigError("tilted rate vectors must match the model's class count");
    for (std::size_t l = 0; l < tilt.lambda_tilde.size(); ++l) {
        if (!(tilt.lambda_tilde[l] > 0.0) || !std::isfinite(tilt.lambda_tilde[l]))
            throw NonPositiveRate("lambda_tilde[" + std::to_string(l + 1) + "] must be positive");
        if (!(tilt.mu_tilde[l] > 0.0) || !std::isfinite(tilt.mu_tilde[l]))
            throw NonPositiveRate("mu_tilde[" + std::to_string(l + 1) + "] must be positive");
    }
    if (tilt.target_class < 1 || tilt.target_class > params.num_classes())
        throw ConfigError("tilt target class out of range");
    if (std::isnan(tilt.gamma_max) || tilt.gamma_max < 0.0)
        throw ConfigError("switching level must be non-negative (or +inf to disable)");
}

/// Which measure drives a cycle: the true dynamics, or tilted dynamics with a
/// switch back at the stopping time.
class SamplingPolicy {
public:
    static SamplingPolicy true_measure() { return SamplingPolicy(); }

    static SamplingPolicy switching(TiltedRates rates) {
        SamplingPolicy p;
        p.tilted_ = true;
        p.rates_ = std::move(rates);
        return p;
    }

    bool tilted() const { return tilted_; }
    const TiltedRates& rates() const { return rates_; }

private:
    SamplingPolicy() = default;
    bool tilted_ = false;
    TiltedRates rates_;
};

/// Log of the exponential density ratio f_rate(x) / f_rate_tilde(x).
inline double log_exp_ratio(double rate, double rate_tilde, double x) {
    return std::log(rate / rate_tilde) + (rate_tilde - rate) * x;
}

/// Log of the survival ratio G_rate(h) / G_rate_tilde(h) for an exponential
/// clock of age h (the unfinished inter-arrival at the stopping time).
inline double log_exp_tail_ratio(double rate, double rate_tilde, double h) {
    return (rate_tilde - rate) * h;
}

/// Accumulates the log likelihood ratio dP/dP_tilde of a cycle prefix, term
/// by term. Realized draws (inter-arrival gaps and attached service times)
/// enter through the density ratio; the still-running arrival clocks enter
/// through their survival ratio, which depends on their current ages and so
/// is supplied by the caller at evaluation time.
///
/// Once the policy switches back to the true measure, the ratio is frozen:
/// every later event has the same density under both measures, and the value
/// recorded at the switch applies to all subsequent jobs of the cycle.
class LikelihoodTracker {
public:
    void add_gap(double rate, double rate_tilde, double gap) {
        running_ += log_exp_ratio(rate, rate_tilde, gap);
    }

    void add_service(double rate, double rate_tilde, double draw) {
        running_ += log_exp_ratio(rate, rate_tilde, draw);
    }

    /// Seals the ratio at the stopping time. `age_terms` is the summed
    /// survival correction of all arrival clocks at that instant.
    void freeze(double when, double age_terms) {
        frozen_ = true;
        switch_time_ = when;
        value_ = running_ + age_terms;
    }

    /// Log ratio seen by a job entering service now; `age_terms` as above,
    /// ignored once frozen.
    double log_ratio(double age_terms) const {
        return frozen_ ? value_ : running_ + age_terms;
    }

    bool frozen() const { return frozen_; }
    double switch_time() const { return switch_time_; }

private:
    double running_ = 0.0;
    double value_ = 0.0;
    double switch_time_ = std::numeric_limits<double>::infinity();
    bool frozen_ = false;
};

} // namespace pqtail
