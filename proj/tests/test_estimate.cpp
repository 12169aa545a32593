#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "pqtail/estimate.hpp"
#include "pqtail/parallel.hpp"

using namespace pqtail;

namespace {

struct JobSpec {
    int cls;
    double response;
    double ll = 0.0;
};

CycleRecord make_cycle(std::vector<JobSpec> jobs, std::vector<std::uint32_t> counts) {
    CycleRecord c;
    for (const JobSpec& j : jobs) {
        JobRecord job;
        job.job_class = j.cls;
        job.response_time = j.response;
        job.log_likelihood = j.ll;
        c.jobs.push_back(job);
    }
    c.count_by_class = std::move(counts);
    c.alpha = 1.0;
    return c;
}

// ten single-job cycles with unit weights and responses 1..10
std::vector<CycleRecord> ladder() {
    std::vector<CycleRecord> cycles;
    for (int i = 1; i <= 10; ++i)
        cycles.push_back(make_cycle({{1, static_cast<double>(i)}}, {1}));
    return cycles;
}

} // namespace

TEST_CASE("weighted sample is sorted with deterministic tie breaks") {
    std::vector<CycleRecord> cycles;
    cycles.push_back(make_cycle({{1, 3.0, 0.0}, {2, 1.0, 0.0}, {1, 2.0, std::log(0.5)}}, {2, 1}));
    cycles.push_back(make_cycle({{1, 2.0, std::log(2.0)}}, {1, 0}));
    WeightedSample ws = make_weighted_sample(cycles, 1);
    REQUIRE(ws.beta() == 3);
    CHECK(ws.m1 == 2);
    CHECK(ws.entries[0].response == 2.0);
    CHECK(ws.entries[0].cycle_index == 0); // tie on response: lower cycle first
    CHECK(ws.entries[0].weight == Catch::Approx(0.5).margin(1e-15));
    CHECK(ws.entries[1].response == 2.0);
    CHECK(ws.entries[1].cycle_index == 1);
    CHECK(ws.entries[1].weight == Catch::Approx(2.0).margin(1e-15));
    CHECK(ws.entries[2].response == 3.0);
}

TEST_CASE("denominator estimate") {
    std::vector<CycleRecord> cycles;
    cycles.push_back(make_cycle({}, {2, 5}));
    cycles.push_back(make_cycle({}, {1, 0}));
    cycles.push_back(make_cycle({}, {3, 1}));
    DenominatorEstimate den = make_denominator(cycles, 1);
    CHECK(den.m2 == 3);
    CHECK(den.sum_alpha_k == 6);
    CHECK(den.mean_alpha_k == 2.0);
    DenominatorEstimate den2 = make_denominator(cycles, 2);
    CHECK(den2.sum_alpha_k == 6);
}

TEST_CASE("tail probability hand example") {
    // two IS cycles with class-1 responses {1, 3, 5} and weights {0.5, 2, 0.25};
    // four naive cycles with 6 class-1 jobs, so mean alpha = 1.5.
    // p_hat(2) = ((2 + 0.25)/2) / 1.5 = 0.75 by hand; at gamma = 3 only the
    // strictly-above weight 0.25 counts: (0.25/2)/1.5 = 1/12
    std::vector<CycleRecord> is_cycles;
    is_cycles.push_back(make_cycle({{1, 1.0, std::log(0.5)}, {1, 5.0, std::log(0.25)}}, {2}));
    is_cycles.push_back(make_cycle({{1, 3.0, std::log(2.0)}}, {1}));
    std::vector<CycleRecord> nv;
    nv.push_back(make_cycle({}, {2}));
    nv.push_back(make_cycle({}, {1}));
    nv.push_back(make_cycle({}, {3}));
    nv.push_back(make_cycle({}, {0}));
    WeightedSample ws = make_weighted_sample(is_cycles, 1);
    DenominatorEstimate den = make_denominator(nv, 1);
    CHECK(tail_probability(ws, den, 2.0) == Catch::Approx(0.75).margin(1e-15));
    CHECK(tail_probability(ws, den, 3.0) == Catch::Approx(1.0 / 12.0).margin(1e-15));
    CHECK(tail_probability(ws, den, 0.0) == Catch::Approx(2.75 / 2.0 / 1.5).margin(1e-15));
    CHECK(tail_probability(ws, den, 1e9) == 0.0);
    CHECK_THROWS_AS(tail_probability(ws, den, -1.0), ConfigError);
}

TEST_CASE("tail probability error cases") {
    std::vector<CycleRecord> empty;
    std::vector<CycleRecord> no_k;
    no_k.push_back(make_cycle({}, {0}));
    WeightedSample ws_empty = make_weighted_sample(empty, 1);
    DenominatorEstimate den_zero = make_denominator(no_k, 1);
    std::vector<CycleRecord> one;
    one.push_back(make_cycle({{1, 1.0}}, {1}));
    WeightedSample ws_one = make_weighted_sample(one, 1);
    DenominatorEstimate den_one = make_denominator(one, 1);
    CHECK_THROWS_AS(tail_probability(ws_empty, den_one, 1.0), EmptySample);
    CHECK_THROWS_AS(tail_probability(ws_one, den_zero, 1.0), EmptyDenominator);
}

TEST_CASE("quantile hand example: unit weight ladder") {
    // responses 1..10 with unit weights, m1 = m2, sum alpha = 10. At p = 0.85
    // the threshold is 1.5; excluding the top two leaves mass 1 < 1.5 while
    // excluding only the top one leaves 2 >= 1.5, so the estimate is 9
    auto cycles = ladder();
    WeightedSample ws = make_weighted_sample(cycles, 1);
    DenominatorEstimate den = make_denominator(cycles, 1);
    CHECK(quantile(ws, den, 0.85) == 9.0);
    // and it matches the scan definition inf{gamma in sample : tail < 1-p}
    CHECK(tail_probability(ws, den, 9.0) < 0.15);
    CHECK(tail_probability(ws, den, 8.0) >= 0.15);
    // both edges
    CHECK(quantile(ws, den, 0.05) == 1.0);
    CHECK(quantile(ws, den, 0.999) == 10.0);
    CHECK_THROWS_AS(quantile(ws, den, 0.0), ConfigError);
    CHECK_THROWS_AS(quantile(ws, den, 1.0), ConfigError);
}

TEST_CASE("single entry sample pins the quantile to it") {
    std::vector<CycleRecord> one;
    one.push_back(make_cycle({{1, 4.25}}, {1}));
    WeightedSample ws = make_weighted_sample(one, 1);
    DenominatorEstimate den = make_denominator(one, 1);
    CHECK(quantile(ws, den, 0.5) == 4.25);
    CHECK(quantile(ws, den, 0.999999) == 4.25);
}

TEST_CASE("quantile equals the scan definition on random weighted samples") {
    Xoshiro256 rng = make_stream(77, phase::production, 0, 0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<CycleRecord> cycles;
        const int m = 20 + static_cast<int>(rng.next() % 30);
        for (int i = 0; i < m; ++i) {
            std::vector<JobSpec> jobs;
            const int nj = static_cast<int>(rng.next() % 4);
            for (int j = 0; j < nj; ++j)
                jobs.push_back({1, 10.0 * rng.uniform01(), std::log(rng.uniform01() * 2.0)});
            std::vector<std::uint32_t> counts{static_cast<std::uint32_t>(nj)};
            cycles.push_back(make_cycle(jobs, counts));
        }
        WeightedSample ws = make_weighted_sample(cycles, 1);
        if (ws.entries.empty()) continue;
        DenominatorEstimate den = make_denominator(cycles, 1);
        for (double p : {0.3, 0.7, 0.9, 0.99}) {
            const double q = quantile(ws, den, p);
            // scan the sample points in ascending order for the first gamma
            // with tail_probability(gamma) < 1-p
            double scan = std::numeric_limits<double>::quiet_NaN();
            for (const auto& e : ws.entries) {
                if (tail_probability(ws, den, e.response) < 1.0 - p) {
                    scan = e.response;
                    break;
                }
            }
            if (std::isnan(scan)) scan = ws.entries.back().response;
            REQUIRE(q == scan);
        }
    }
}

TEST_CASE("level resolution flag") {
    auto cycles = ladder();
    WeightedSample ws = make_weighted_sample(cycles, 1);
    DenominatorEstimate den = make_denominator(cycles, 1);
    CHECK(level_resolved(ws, den, 0.85));        // threshold 1.5 >= top weight 1
    CHECK(level_resolved(ws, den, 0.875));       // dyadic: threshold exactly 1.25
    // 1 - 0.9 rounds below 0.1, so the threshold lands just under the top
    // weight and the level counts as unresolved
    CHECK_FALSE(level_resolved(ws, den, 0.9));
    CHECK_FALSE(level_resolved(ws, den, 0.95));  // threshold 0.5 < 1
    CHECK_FALSE(level_resolved(ws, den, 0.9999));
}

TEST_CASE("batch CI structure and failure modes") {
    ModelParams mm1{{0.5}, {1.0}};
    auto is_cycles = simulate_cycles(mm1, SamplingPolicy::true_measure(), 3, phase::production,
                                     0, 3000, 1, {});
    auto nv_cycles = simulate_cycles(mm1, SamplingPolicy::true_measure(), 3, phase::denominator,
                                     0, 1500, 1, {});
    QuantileReport rep = batch_ci(is_cycles, nv_cycles, 1, 0.9, 30);
    CHECK(rep.r == 30);
    CHECK(rep.c1 == 100);
    CHECK(rep.c2 == 50);
    CHECK(rep.m1 == 3000);
    CHECK(rep.m2 == 1500);
    CHECK(rep.ci_low <= rep.q_hat);
    CHECK(rep.ci_high >= rep.q_hat);
    CHECK(rep.q_hat > 0.0);
    CHECK(rep.sigma_hat > 0.0);
    CHECK(rep.relative_error == Catch::Approx(rep.sigma_hat / rep.q_hat));
    CHECK(rep.ci_high - rep.q_hat ==
          Catch::Approx(1.96 * rep.sigma_hat / std::sqrt(30.0)).margin(1e-12));
    CHECK(rep.resolved);
    // the p = 0.9 quantile of M/M/1 sojourn is -log(0.1)/0.5 = 4.605...;
    // a 3000-cycle run should land well within 15%
    CHECK(rep.q_hat == Catch::Approx(4.60517).epsilon(0.15));

    CHECK_THROWS_AS(batch_ci(is_cycles, nv_cycles, 1, 0.9, 1), BatchTooSmall);
    CHECK_THROWS_AS(batch_ci(is_cycles, nv_cycles, 1, 0.9, 7), BatchTooSmall); // 3000 % 7 != 0
    std::vector<CycleRecord> none;
    CHECK_THROWS_AS(batch_ci(none, nv_cycles, 1, 0.9, 30), EmptySample);
}

TEST_CASE("batch CI rejects batches without target jobs") {
    // 4 cycles, 2 batches; the second batch has no class-1 jobs at all
    std::vector<CycleRecord> is_cycles;
    is_cycles.push_back(make_cycle({{1, 1.0}}, {1, 0}));
    is_cycles.push_back(make_cycle({{1, 2.0}}, {1, 0}));
    is_cycles.push_back(make_cycle({{2, 3.0}}, {0, 1}));
    is_cycles.push_back(make_cycle({{2, 4.0}}, {0, 1}));
    CHECK_THROWS_AS(batch_ci(is_cycles, is_cycles, 1, 0.5, 2), BatchTooSmall);
}

TEST_CASE("degenerate batches collapse the interval onto the point") {
    // every batch sees the same single response, so sigma_hat is exactly 0
    std::vector<CycleRecord> cycles;
    for (int i = 0; i < 4; ++i) cycles.push_back(make_cycle({{1, 2.5}}, {1}));
    QuantileReport rep = batch_ci(cycles, cycles, 1, 0.5, 2);
    CHECK(rep.q_hat == 2.5);
    CHECK(rep.sigma_hat == 0.0);
    CHECK(rep.ci_low == 2.5);
    CHECK(rep.ci_high == 2.5);
}

TEST_CASE("tail probability CI at a fixed level") {
    ModelParams mm1{{0.5}, {1.0}};
    auto cycles = simulate_cycles(mm1, SamplingPolicy::true_measure(), 4, phase::production, 0,
                                  3000, 1, {});
    const double gamma = 4.605170185988091; // true tail 0.1
    TailReport rep = tail_probability_ci(cycles, cycles, 1, gamma, 30);
    CHECK(rep.gamma == gamma);
    CHECK(rep.p_hat == Catch::Approx(0.1).epsilon(0.2));
    CHECK(rep.ci_low <= rep.p_hat);
    CHECK(rep.ci_high >= rep.p_hat);
    CHECK(rep.sigma_hat > 0.0);
}

TEST_CASE("z variance hand example") {
    std::vector<CycleRecord> is_cycles;
    is_cycles.push_back(make_cycle({{1, 5.0}, {1, 1.0}}, {2}));
    is_cycles.push_back(make_cycle({{1, 1.5}}, {1}));
    // p_hat(2) = (1/2) / (3/2) = 1/3; z = {1 - 2/3, 0 - 1/3} = {1/3, -1/3};
    // sample variance = 2/9
    CHECK(z_variance(is_cycles, is_cycles, 1, 2.0) ==
          Catch::Approx(2.0 / 9.0).margin(1e-15));
}

TEST_CASE("z variance is exactly zero in the self-paired gamma 0 case") {
    ModelParams mm1{{0.5}, {1.0}};
    auto cycles = simulate_cycles(mm1, SamplingPolicy::true_measure(), 5, phase::production, 0,
                                  200, 1, {});
    CHECK(z_variance(cycles, cycles, 1, 0.0) == 0.0);
}

TEST_CASE("z variance requires aligned samples") {
    std::vector<CycleRecord> a;
    a.push_back(make_cycle({{1, 1.0}}, {1}));
    a.push_back(make_cycle({{1, 2.0}}, {1}));
    std::vector<CycleRecord> b(a);
    b.push_back(make_cycle({{1, 3.0}}, {1}));
    CHECK_THROWS_AS(z_variance(a, b, 1, 1.0), ConfigError);
    std::vector<CycleRecord> one(a.begin(), a.begin() + 1);
    CHECK_THROWS_AS(z_variance(one, one, 1, 1.0), EmptySample);
}

TEST_CASE("pilot sizing") {
    QuantileReport pilot;
    pilot.q_hat = 1.0;
    pilot.sigma_hat = 0.02;
    pilot.m1 = 10000;
    // (0.02/0.001)^2 * 10000 = 4,000,000 cycles, rounded up to a multiple of 30
    CHECK(required_cycles(pilot, 0.001, 30) == 4000020);
    // target already met: floor at one cycle per batch
    CHECK(required_cycles(pilot, 0.5, 30) == 30);
    CHECK_THROWS_AS(required_cycles(pilot, 0.0, 30), ConfigError);
    QuantileReport bad;
    CHECK_THROWS_AS(required_cycles(bad, 0.1, 30), EmptySample);
}
