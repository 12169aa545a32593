#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "pqtail/engine.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"
#include "pqtail/rng.hpp"

namespace pqtail {

/// Simulates `count` cycles indexed 0..count-1 and maps each to a payload in
/// its slot. Cycle i always draws from the stream keyed (seed, phase, sub, i),
/// and slots are written by index, so the result is identical for any worker
/// count. `fn(index, CycleRecord&&) -> Payload`.
template <class Payload, class Fn>
std::vector<Payload> map_cycles(const ModelParams& params, const SamplingPolicy& policy,
                                std::uint64_t seed, std::uint64_t phase_tag, std::uint64_t sub,
                                std::uint64_t count, int workers, const EngineOptions& opt,
                                Fn&& fn) {
    std::vector<Payload> out(count);
    if (count == 0) return out;

    auto run_range = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Xoshiro256 rng = make_stream(seed, phase_tag, sub, i);
            out[i] = fn(i, simulate_cycle(params, policy, rng, opt));
        }
    };

    if (workers <= 1 || count == 1) {
        run_range(0, count);
        return out;
    }

    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), count));
    std::atomic<std::uint64_t> cursor{0};
    const std::uint64_t chunk = std::max<std::uint64_t>(1, count / (n_threads * 16));
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        try {
            for (;;) {
                const std::uint64_t lo = cursor.fetch_add(chunk);
                if (lo >= count) return;
                run_range(lo, std::min(lo + chunk, count));
            }
        } catch (...) {
            std::lock_guard<std::mutex> g(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

inline std::vector<CycleRecord> simulate_cycles(const ModelParams& params,
                                                const SamplingPolicy& policy,
                                                std::uint64_t seed, std::uint64_t phase_tag,
                                                std::uint64_t sub, std::uint64_t count,
                                                int workers, const EngineOptions& opt = {}) {
    return map_cycles<CycleRecord>(params, policy, seed, phase_tag, sub, count, workers, opt,
                                   [](std::uint64_t, CycleRecord&& c) { return std::move(c); });
}

/// Cycle source for run_ce backed by the parallel driver.
struct ParallelSource {
    const ModelParams& params;
    std::uint64_t seed;
    int workers;
    EngineOptions opt;

    std::vector<CycleRecord> operator()(const SamplingPolicy& policy, std::uint64_t phase_tag,
                                        std::uint64_t sub, std::uint64_t count) const {
        return simulate_cycles(params, policy, seed, phase_tag, sub, count, workers, opt);
    }
};

} // namespace pqtail
