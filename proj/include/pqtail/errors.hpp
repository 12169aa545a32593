#pragma once

#include <stdexcept>
#include <string>

namespace pqtail {

/// Base class for all library errors. `exit_code()` maps the error family to
/// the process exit status used by the command line tool:
///   2 = invalid configuration or model parameters
///   3 = numerical / statistical failure (degenerate sample, unresolved level, ...)
///   4 = safety cap tripped
class SimError : public std::runtime_error {
public:
    explicit SimError(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

class ConfigError : public SimError {
public:
    explicit ConfigError(std::string msg) : SimError(std::move(msg), 2) {}
};

/// Arrival or service rate is zero or negative.
class NonPositiveRate : public ConfigError {
public:
    explicit NonPositiveRate(std::string msg) : ConfigError(std::move(msg)) {}
};

/// Total offered load is >= 1 so no stationary regime exists.
class UnstableModel : public ConfigError {
public:
    explicit UnstableModel(std::string msg) : ConfigError(std::move(msg)) {}
};

class StatError : public SimError {
public:
    explicit StatError(std::string msg) : SimError(std::move(msg), 3) {}
};

/// Denominator sample has zero total cycle length.
class EmptyDenominator : public StatError {
public:
    explicit EmptyDenominator(std::string msg) : StatError(std::move(msg)) {}
};

/// No responses available to invert for a quantile.
class EmptySample : public StatError {
public:
    explicit EmptySample(std::string msg) : StatError(std::move(msg)) {}
};

/// The requested quantile lies beyond the largest observed response, i.e.
/// even the full weight mass above the top order statistic exceeds the
/// threshold, so the sample cannot resolve the level.
class Unresolvable : public StatError {
public:
    explicit Unresolvable(std::string msg) : StatError(std::move(msg)) {}
};

/// Batch-means confidence interval asked for with fewer than two batches or
/// with a batch that contains no usable cycles.
class BatchTooSmall : public StatError {
public:
    explicit BatchTooSmall(std::string msg) : StatError(std::move(msg)) {}
};

/// No job of the target class was observed in the whole sample.
class NoTargetJobs : public StatError {
public:
    explicit NoTargetJobs(std::string msg) : StatError(std::move(msg)) {}
};

/// Elite set of a cross-entropy iteration carries zero total weight, so the
/// closed form update is undefined.
class DegenerateElite : public StatError {
public:
    explicit DegenerateElite(std::string msg) : StatError(std::move(msg)) {}
};

/// Adaptive level failed to move for several consecutive iterations.
class NoProgress : public StatError {
public:
    explicit NoProgress(std::string msg) : StatError(std::move(msg)) {}
};

/// Cross-entropy search exhausted its iteration budget before reaching the
/// target level.
class IterationCap : public StatError {
public:
    explicit IterationCap(std::string msg) : StatError(std::move(msg)) {}
};

/// A single regenerative cycle exceeded the event safety cap, which normally
/// means the simulated measure is supercritical and the cycle will never end.
class CycleLengthExceeded : public SimError {
public:
    explicit CycleLengthExceeded(std::string msg) : SimError(std::move(msg), 4) {}
};

} // namespace pqtail
