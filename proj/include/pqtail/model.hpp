#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pqtail/errors.hpp"

namespace pqtail {

/// Non-preemptive single-server priority queue with Poisson arrivals and
/// exponential services. Class 1 (index 0) has the highest priority; within a
/// class, service order is first come first served. The server always picks
/// the head of the highest priority non-empty queue and never interrupts a
/// job in service.
struct ModelParams {
    std::vector<double> lambda; // arrival rate per class, index 0 = class 1
    std::vector<double> mu;     // service rate per class

    int num_classes() const { return static_cast<int>(lambda.size()); }

    double load() const {
        double rho = 0.0;
        for (std::size_t l = 0; l < lambda.size(); ++l) rho += lambda[l] / mu[l];
        return rho;
    }

    double total_arrival_rate() const {
        double s = 0.0;
        for (double v : lambda) s += v;
        return s;
    }
};

inline void validate(const ModelParams& params) {
    if (params.lambda.empty() || params.lambda.size() != params.mu.size())
        throw ConfigError("model needs matching non-empty lambda and mu vectors");
    for (std::size_t l = 0; l < params.lambda.size(); ++l) {
        if (!(params.lambda[l] > 0.0) || !std::isfinite(params.lambda[l]))
            throw NonPositiveRate("lambda[" + std::to_string(l + 1) + "] must be positive");
        if (!(params.mu[l] > 0.0) || !std::isfinite(params.mu[l]))
            throw NonPositiveRate("mu[" + std::to_string(l + 1) + "] must be positive");
    }
    if (!(params.load() < 1.0))
        throw UnstableModel("offered load " + std::to_string(params.load()) +
                            " is not below 1, the queue has no steady state");
}

/// One estimation target: the tail level p of the stationary sojourn time of
/// class k. `gamma_max` is an a priori upper bound on the quantile; when it
/// is absent the driver discovers a working bound adaptively.
struct SlaTarget {
    int target_class = 1; // 1-based
    double p = 0.999;
    std::optional<double> gamma_max;
};

inline void validate(const ModelParams& params, const SlaTarget& target) {
    if (target.target_class < 1 || target.target_class > params.num_classes())
        throw ConfigError("target class " + std::to_string(target.target_class) +
                          " out of range 1.." + std::to_string(params.num_classes()));
    if (!(target.p > 0.0) || !(target.p < 1.0))
        throw ConfigError("tail level p must lie strictly between 0 and 1");
    if (target.gamma_max && (!(*target.gamma_max > 0.0) || !std::isfinite(*target.gamma_max)))
        throw ConfigError("gamma_max must be a positive finite number when given");
}

/// Closed form p-quantile of the stationary sojourn time in a plain M/M/1
/// queue (single class, FCFS): the sojourn time is exponential with rate
/// mu - lambda.
inline double mm1_sojourn_quantile(double lambda, double mu, double p) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw NonPositiveRate("rates must be positive");
    if (!(lambda < mu)) throw UnstableModel("lambda must be below mu");
    if (!(p > 0.0) || !(p < 1.0)) throw ConfigError("p must lie strictly between 0 and 1");
    return -std::log1p(-p) / (mu - lambda);
}

} // namespace pqtail
