#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "pqtail/errors.hpp"
#include "pqtail/measure.hpp"
#include "pqtail/model.hpp"
#include "pqtail/rng.hpp"

namespace pqtail {

/// One served job. `log_likelihood` is the log ratio dP/dP_tilde of the cycle
/// prefix at the instant the job entered service; identically zero under the
/// true measure.
struct JobRecord {
    int job_class = 0; // 1-based
    double arrival_time = 0.0;
    double enter_service_time = 0.0;
    double departure_time = 0.0;
    double response_time = 0.0;
    double log_likelihood = 0.0;
};

/// Per-class path statistics frozen at the stopping time (the switch instant
/// for switched cycles, the cycle end otherwise). These are the sufficient
/// statistics of the exponential family: counts, realized exposure times and
/// the ages of the unfinished arrival clocks. Service sums follow the
/// attachment rule: classes at or above the target priority realize service
/// at arrival (service_arrived_sum), lower priority classes at service entry
/// (service_entered_sum).
struct StoppedStats {
    std::vector<std::uint32_t> arrivals;         // N^A_l
    std::vector<std::uint32_t> service_entries;  // N^S_l
    std::vector<double> interarrival_sum;        // sum of realized gaps
    std::vector<double> arrival_age;             // unfinished gap at the stop
    std::vector<double> service_arrived_sum;     // services attached at arrival
    std::vector<double> service_entered_sum;     // services drawn when entering
};

/// One regenerative cycle: starts at an instant the system is empty, ends at
/// the first departure that leaves it empty again. Jobs appear in service
/// order. A switched cycle ran tilted dynamics up to switch_time and the true
/// dynamics afterwards.
struct CycleRecord {
    std::vector<JobRecord> jobs;
    std::vector<std::uint32_t> count_by_class;
    double alpha = 0.0; // cycle length
    bool switched = false;
    double switch_time = std::numeric_limits<double>::infinity();
    int target_class = 0; // 0 under the true measure
    StoppedStats stopped;
};

/// Job parked in its class queue. service_time is NaN while the draw is
/// deferred to service entry.
struct WaitingJob {
    double arrival_time = 0.0;
    double service_time = std::numeric_limits<double>::quiet_NaN();
};

/// Queue state needed to bound the response of an arriving job.
struct ServerState {
    double clock = 0.0;
    bool busy = false;
    double serving_departure = std::numeric_limits<double>::infinity();
    std::vector<double> queued_service_sum; // attached services waiting, per class
};

/// Certain-delay lower bound on the response of a class-k job arriving now
/// with the given (already attached) service requirement: the residual of the
/// job in service, plus every attached service of waiting jobs with priority
/// at least k, plus its own. Future higher-priority arrivals can only add to
/// this, so a bound above gamma_max guarantees the realized response exceeds
/// gamma_max as well.
inline double lower_bound_response(const ServerState& state, int target_class,
                                   double own_service) {
    double r = state.busy ? state.serving_departure - state.clock : 0.0;
    for (int l = 0; l < target_class; ++l) r += state.queued_service_sum[l];
    return r + own_service;
}

struct EngineOptions {
    std::uint64_t max_events = 100000000ULL;
};

namespace detail {

struct Event {
    double time;
    int kind; // 0 departure, 1 arrival: departures win ties
    int cls;
    std::uint64_t gen;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.cls > b.cls;
    }
};

struct ClassQueue {
    std::vector<WaitingJob> buf;
    std::size_t head = 0;
    bool empty() const { return head == buf.size(); }
    void push(const WaitingJob& j) { buf.push_back(j); }
    WaitingJob pop() { return buf[head++]; }
};

} // namespace detail

/// Simulates one full regenerative cycle, drawing everything from `rng`.
///
/// The clock starts at the regeneration instant (system empty, all arrival
/// clocks fresh), so realized gaps plus final ages add up exactly to the
/// stopped horizon per class and the likelihood accounting is exact. Under a
/// switching policy the tilted rates drive every draw until the first
/// target-class arrival whose response bound exceeds gamma_max; at that
/// instant the likelihood and path statistics freeze, pending arrivals are
/// redrawn from the true rates (memorylessness makes the restart exact), and
/// the cycle runs to completion under the true dynamics.
///
/// Draw order is fixed: initial arrival per class in class order; per arrival
/// event the attached service (if any), then on a switch the redrawn arrivals
/// in class order, otherwise the next arrival of the same class; at a service
/// entry the deferred service draw.
inline CycleRecord simulate_cycle(const ModelParams& params, const SamplingPolicy& policy,
                                  Xoshiro256& rng, const EngineOptions& opt = {}) {
    const int K = params.num_classes();
    const bool tilted = policy.tilted();
    const TiltedRates* tilt = tilted ? &policy.rates() : nullptr;
    const int target = tilted ? tilt->target_class : 0; // 1-based
    const double gamma_max =
        tilted ? tilt->gamma_max : std::numeric_limits<double>::infinity();
    const bool can_switch = tilted && std::isfinite(gamma_max);

    CycleRecord rec;
    rec.target_class = target;
    rec.count_by_class.assign(K, 0);
    rec.stopped.arrivals.assign(K, 0);
    rec.stopped.service_entries.assign(K, 0);
    rec.stopped.interarrival_sum.assign(K, 0.0);
    rec.stopped.arrival_age.assign(K, 0.0);
    rec.stopped.service_arrived_sum.assign(K, 0.0);
    rec.stopped.service_entered_sum.assign(K, 0.0);

    LikelihoodTracker lr;
    bool pushed = tilted; // tilted rates currently drive the draws
    bool stats_open = true;

    std::vector<double> last_arrival(K, 0.0);
    std::vector<std::uint64_t> arrival_gen(K, 0);
    std::vector<detail::ClassQueue> queues(K);
    std::vector<std::uint32_t> n_arrived(K, 0), n_entered(K, 0);
    std::vector<double> gap_sum(K, 0.0), svc_arrived(K, 0.0), svc_entered(K, 0.0);

    ServerState state;
    state.queued_service_sum.assign(K, 0.0);

    struct Serving {
        int cls = -1; // 0-based
        double arrival = 0.0, entered = 0.0, depart = 0.0, ll = 0.0;
    } serving;

    auto arr_rate = [&](int l) { return pushed ? tilt->lambda_tilde[l] : params.lambda[l]; };
    auto svc_rate = [&](int l) { return pushed ? tilt->mu_tilde[l] : params.mu[l]; };

    // Survival correction of the K running arrival clocks; only meaningful
    // while pushed.
    auto age_terms = [&](double now) {
        double s = 0.0;
        for (int l = 0; l < K; ++l)
            s += log_exp_tail_ratio(params.lambda[l], tilt->lambda_tilde[l],
                                    now - last_arrival[l]);
        return s;
    };

    auto freeze_stats = [&](double now) {
        for (int l = 0; l < K; ++l) {
            rec.stopped.arrivals[l] = n_arrived[l];
            rec.stopped.service_entries[l] = n_entered[l];
            rec.stopped.interarrival_sum[l] = gap_sum[l];
            rec.stopped.arrival_age[l] = now - last_arrival[l];
            rec.stopped.service_arrived_sum[l] = svc_arrived[l];
            rec.stopped.service_entered_sum[l] = svc_entered[l];
        }
        stats_open = false;
    };

    std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventAfter> heap;

    auto enter_service = [&](int l, const WaitingJob& job) {
        ++n_entered[l];
        double s = job.service_time;
        if (std::isnan(s)) {
            s = rng.exponential(svc_rate(l));
            if (pushed) lr.add_service(params.mu[l], tilt->mu_tilde[l], s);
        }
        svc_entered[l] += s;
        double ll = 0.0;
        if (tilted) ll = lr.log_ratio(pushed ? age_terms(state.clock) : 0.0);
        state.busy = true;
        state.serving_departure = state.clock + s;
        serving = {l, job.arrival_time, state.clock, state.clock + s, ll};
        heap.push({serving.depart, 0, l, 0});
    };

    for (int l = 0; l < K; ++l)
        heap.push({rng.exponential(arr_rate(l)), 1, l, 0});

    std::uint64_t events = 0;
    for (;;) {
        detail::Event ev = heap.top();
        heap.pop();
        if (ev.kind == 1 && ev.gen != arrival_gen[ev.cls]) continue; // redrawn at the switch
        if (++events > opt.max_events)
            throw CycleLengthExceeded("cycle exceeded " + std::to_string(opt.max_events) +
                                      " events; the sampling measure is likely unstable");
        state.clock = ev.time;

        if (ev.kind == 0) {
            rec.jobs.push_back({serving.cls + 1, serving.arrival, serving.entered,
                                state.clock, state.clock - serving.arrival, serving.ll});
            ++rec.count_by_class[serving.cls];
            state.busy = false;
            state.serving_departure = std::numeric_limits<double>::infinity();
            int nl = -1;
            for (int l = 0; l < K; ++l)
                if (!queues[l].empty()) {
                    nl = l;
                    break;
                }
            if (nl >= 0) {
                WaitingJob j = queues[nl].pop();
                if (!std::isnan(j.service_time)) state.queued_service_sum[nl] -= j.service_time;
                enter_service(nl, j);
            } else {
                rec.alpha = state.clock;
                if (stats_open) freeze_stats(state.clock);
                return rec;
            }
            continue;
        }

        const int l = ev.cls;
        const double gap = state.clock - last_arrival[l];
        if (pushed) lr.add_gap(params.lambda[l], tilt->lambda_tilde[l], gap);
        gap_sum[l] += gap;
        last_arrival[l] = state.clock;
        ++n_arrived[l];

        WaitingJob job{state.clock, std::numeric_limits<double>::quiet_NaN()};
        if (tilted && l + 1 <= target) {
            job.service_time = rng.exponential(svc_rate(l));
            if (pushed) lr.add_service(params.mu[l], tilt->mu_tilde[l], job.service_time);
            svc_arrived[l] += job.service_time;
        }

        bool fired = false;
        if (pushed && can_switch && l + 1 == target &&
            lower_bound_response(state, target, job.service_time) > gamma_max) {
            lr.freeze(state.clock, age_terms(state.clock));
            freeze_stats(state.clock);
            rec.switched = true;
            rec.switch_time = state.clock;
            pushed = false;
            fired = true;
            for (int l2 = 0; l2 < K; ++l2) {
                ++arrival_gen[l2];
                heap.push({state.clock + rng.exponential(params.lambda[l2]), 1, l2,
                           arrival_gen[l2]});
            }
        }
        if (!fired)
            heap.push({state.clock + rng.exponential(arr_rate(l)), 1, l, arrival_gen[l]});

        if (!state.busy) {
            enter_service(l, job);
        } else {
            if (!std::isnan(job.service_time)) state.queued_service_sum[l] += job.service_time;
            queues[l].push(job);
        }
    }
}

} // namespace pqtail
