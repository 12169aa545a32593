#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqtail/measure.hpp"

using namespace pqtail;

TEST_CASE("density ratio term") {
    // oracle: log(f_r(x)/f_rt(x)) = log(r/rt) + (rt - r) x, evaluated by hand
    // for r=2, rt=3, x=0.5: log(2/3) + 0.5 = 0.0945348918918356
    CHECK(log_exp_ratio(2.0, 3.0, 0.5) ==
          Catch::Approx(std::log(2.0 / 3.0) + 0.5).margin(1e-16));
    CHECK(log_exp_ratio(2.0, 3.0, 0.5) == Catch::Approx(0.0945348918918356).margin(1e-15));
    // identical rates contribute exactly zero, bit for bit
    CHECK(log_exp_ratio(1.7, 1.7, 123.456) == 0.0);
}

TEST_CASE("survival ratio term") {
    // oracle: log(G_r(h)/G_rt(h)) = (rt - r) h
    CHECK(log_exp_tail_ratio(0.2, 0.45, 2.0) == Catch::Approx(0.5).margin(1e-16));
    CHECK(log_exp_tail_ratio(0.7, 0.7, 55.0) == 0.0);
}

TEST_CASE("tracker accumulates and freezes") {
    LikelihoodTracker lr;
    lr.add_gap(1.0, 2.0, 0.25);
    lr.add_service(3.0, 1.5, 0.5);
    const double expect_running = log_exp_ratio(1.0, 2.0, 0.25) + log_exp_ratio(3.0, 1.5, 0.5);
    CHECK_FALSE(lr.frozen());
    CHECK(lr.log_ratio(0.0) == Catch::Approx(expect_running).margin(1e-15));
    CHECK(lr.log_ratio(0.125) == Catch::Approx(expect_running + 0.125).margin(1e-15));

    lr.freeze(7.5, 0.25);
    CHECK(lr.frozen());
    CHECK(lr.switch_time() == 7.5);
    // after the freeze the supplied age terms are ignored
    CHECK(lr.log_ratio(99.0) == Catch::Approx(expect_running + 0.25).margin(1e-15));
}

TEST_CASE("identity tilt gives a bitwise zero log ratio") {
    LikelihoodTracker lr;
    for (int i = 0; i < 100; ++i) {
        lr.add_gap(0.9, 0.9, 0.01 * i);
        lr.add_service(2.2, 2.2, 0.03 * i);
    }
    CHECK(lr.log_ratio(0.0) == 0.0);
}

TEST_CASE("tilt validation") {
    ModelParams m{{0.2, 0.4}, {2.0, 1.0}};
    TiltedRates ok{{0.3, 0.5}, {1.5, 0.8}, 1, 10.0};
    CHECK_NOTHROW(validate(m, ok));
    TiltedRates wrong_size{{0.3}, {1.5}, 1, 10.0};
    CHECK_THROWS_AS(validate(m, wrong_size), ConfigError);
    TiltedRates zero_rate{{0.0, 0.5}, {1.5, 0.8}, 1, 10.0};
    CHECK_THROWS_AS(validate(m, zero_rate), NonPositiveRate);
    TiltedRates bad_class{{0.3, 0.5}, {1.5, 0.8}, 3, 10.0};
    CHECK_THROWS_AS(validate(m, bad_class), ConfigError);
    TiltedRates zero_level{{0.3, 0.5}, {1.5, 0.8}, 1, 0.0};
    CHECK_NOTHROW(validate(m, zero_level)); // switch at the first target arrival
    TiltedRates bad_level{{0.3, 0.5}, {1.5, 0.8}, 1, -1.0};
    CHECK_THROWS_AS(validate(m, bad_level), ConfigError);
    TiltedRates inf_level{{0.3, 0.5}, {1.5, 0.8}, 1,
                          std::numeric_limits<double>::infinity()};
    CHECK_NOTHROW(validate(m, inf_level));
    // a deliberately supercritical tilt is a legal sampling measure
    TiltedRates supercritical{{2.0, 3.0}, {1.0, 0.5}, 1, 5.0};
    CHECK_NOTHROW(validate(m, supercritical));
}
