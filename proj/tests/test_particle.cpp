#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fbam/european.hpp"
#include "fbam/particle.hpp"

using namespace fbam;

namespace {

const BlackScholesParams kTable1{0.08, 0.12, 0.2};
const BlackScholesParams kNoDividend{0.05, 0.0, 0.2};

SimConfig sim(std::uint64_t paths, int steps, double lambda, int order, MollifierConfig h, std::uint64_t seed = 7) {
    SimConfig c;
    c.n_paths = paths;
    c.n_steps = steps;
    c.lambda = lambda;
    c.order = order;
    c.mollifier = h;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_SUITE("particle") {

TEST_CASE("jump time inverse cdf") {
    CHECK(jump_after(0.7, 1.0, 2.0) == 0.7);
    CHECK(jump_after(0.2, std::exp(-2.0), 2.0) == doctest::Approx(1.2).epsilon(1e-15));
    RandomStream a(StreamId{4, 1, 0}), b(StreamId{4, 1, 0});
    for (int i = 0; i < 10; ++i) CHECK(draw_next_jump(a, 0.3, 8.0) == jump_after(0.3, b.uniform(), 8.0));
}

TEST_CASE("exponential clock law") {
    const int n = 1000000;
    RandomStream clock(StreamId{2024, 0, 1});
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += draw_next_jump(clock, 0.0, 2.0) < 3.0;
    const double p = 1.0 - std::exp(-6.0);
    const double half = 2.5758293035489 * std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) <= half);
}

TEST_CASE("jump schedule") {
    RandomStream clock(StreamId{5, 0, 1});
    const double T = 1.0;
    const int steps = 50;
    for (int rep = 0; rep < 200; ++rep) {
        const auto js = draw_jump_schedule(clock, 0.0, T, 4.0, T / steps, steps, 10);
        REQUIRE(js.times.size() == js.nodes.size());
        for (std::size_t i = 0; i < js.times.size(); ++i) {
            CHECK(js.times[i] < T);
            if (i > 0) CHECK(js.times[i] > js.times[i - 1]);
            CHECK(js.nodes[i] == std::min(static_cast<int>(std::floor(js.times[i] * steps / T)), steps - 1));
        }
    }
}

TEST_CASE("c-hat weight") {
    CHECK(chat_weight(0.0, 0.5, 4.0, 2.0) == doctest::Approx(5.43656).epsilon(1e-6));
    CHECK(chat_weight(0.1, 0.9, 0.0, 3.0) == 0.0);
    CHECK(chat_weight(0.4, 0.4, 1.0, 1.0) == 1.0);
}

TEST_CASE("configuration checks") {
    const OptionSpec put{OptionKind::Put, 100, 0.5, 100};
    SimConfig bad = sim(10, 10, 2.0, 3, MollifierConfig::uniform(1.0));
    bad.lambda = 0.0;
    CHECK_THROWS_AS(price_american(kNoDividend, put, bad), std::invalid_argument);
    bad = sim(10, 10, 2.0, 5, MollifierConfig::uniform(1.0));
    CHECK_THROWS_AS(price_american(kNoDividend, put, bad), std::invalid_argument);
    bad = sim(10, 10, 2.0, 3, MollifierConfig{1.0, 0.0, 1.0});
    CHECK_THROWS_AS(price_american(kNoDividend, put, bad), std::invalid_argument);
    const HestonParams h{0.05, 0.0, 0.04, 3.0, 0.04, 0.1, -0.1};
    CHECK_THROWS_AS(price_american(h, put, sim(10, 10, 2.0, 4, MollifierConfig::uniform(1.0))),
                    std::invalid_argument);
}

TEST_CASE("order 0 is the european price") {
    const OptionSpec put{OptionKind::Put, 100, 3, 100};
    const auto r = price_american(kTable1, put, sim(1000, 10, 2.0, 0, MollifierConfig::uniform(1.0)));
    REQUIRE(r.cumulative.size() == 1);
    CHECK(r.cumulative[0] == bs_price(kTable1, put, 0.0, 100.0));
    CHECK(r.cumulative_stderr[0] == 0.0);
}

TEST_CASE("no-dividend call is never exercised early") {
    const OptionSpec call{OptionKind::Call, 100, 0.5, 100};
    for (double h : {1e-4, 1.0}) {
        const SimConfig cfg = sim(20000, 100, 2.0, 4, MollifierConfig::uniform(h));
        const ParticleEngine engine(kNoDividend, call, cfg);
        for (std::uint64_t i = 0; i < 20000; ++i) {
            const auto c = engine.path_contribution(i);
            for (int k = 1; k <= 4; ++k) REQUIRE(c[k] == 0.0);
        }
        const auto r = engine.run();
        const double euro = bs_price(kNoDividend, call, 0.0, 100.0);
        for (int k = 0; k <= 4; ++k) CHECK(r.cumulative[k] == euro);
    }
}

TEST_CASE("order-1 contributions of a no-dividend put are non-negative") {
    const OptionSpec put{OptionKind::Put, 100, 0.5, 95};
    const ParticleEngine engine(kNoDividend, put, sim(20000, 100, 2.0, 1, MollifierConfig::uniform(1.0)));
    int positive = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double c = engine.path_contribution(i)[1];
        REQUIRE(c >= 0.0);
        positive += c > 0.0;
    }
    CHECK(positive > 1000);
}

TEST_CASE("result does not depend on the worker count") {
    const OptionSpec put{OptionKind::Put, 100, 3, 90};
    SimConfig cfg = sim(5000, 60, 2.0, 4, MollifierConfig{0.01, 0.01, 0.1});
    const auto a = price_american(kTable1, put, cfg);
    for (unsigned w : {2u, 3u, 8u}) {
        cfg.workers = w;
        const auto b = price_american(kTable1, put, cfg);
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_ == b.stderr_);
        CHECK(a.cumulative == b.cumulative);
        CHECK(a.cumulative_stderr == b.cumulative_stderr);
    }
    cfg.seed = 8;
    CHECK(price_american(kTable1, put, cfg).cumulative[1] != a.cumulative[1]);
}

TEST_CASE("cumulative sums") {
    const OptionSpec put{OptionKind::Put, 100, 3, 100};
    const auto r = price_american(kTable1, put, sim(5000, 60, 2.0, 4, MollifierConfig::uniform(1.0)));
    double acc = 0.0;
    for (int k = 0; k <= 4; ++k) {
        acc += r.mean[k];
        CHECK(r.cumulative[k] == doctest::Approx(acc).epsilon(1e-12));
        CHECK(r.stderr_[k] >= 0.0);
    }
}

TEST_CASE("single-order estimators agree with the joint run") {
    const OptionSpec put{OptionKind::Put, 100, 3, 100};
    const SimConfig cfg = sim(4000, 60, 2.0, 4, MollifierConfig{0.01, 0.01, 0.1});
    const auto r = price_american(kTable1, put, cfg);
    // orders share the main path, so a lower-order run reproduces the same per-order values
    CHECK(estimate_order1(kTable1, put, cfg).mean == r.mean[1]);
    CHECK(estimate_order2(kTable1, put, cfg).mean == r.mean[2]);
    CHECK(estimate_order3(kTable1, put, cfg).mean == r.mean[3]);
    CHECK(estimate_order4(kTable1, put, cfg).mean == r.mean[4]);
}

TEST_CASE("independent orders estimate the same terms") {
    const OptionSpec put{OptionKind::Put, 100, 3, 100};
    SimConfig cfg = sim(40000, 120, 2.0, 3, MollifierConfig::uniform(1.0));
    const auto shared = price_american(kTable1, put, cfg);
    cfg.independent_orders = true;
    const auto indep = price_american(kTable1, put, cfg);
    for (int k = 1; k <= 3; ++k) {
        CHECK(indep.mean[k] != shared.mean[k]);
        CHECK(std::abs(indep.mean[k] - shared.mean[k]) <= 4.0 * std::hypot(indep.stderr_[k], shared.stderr_[k]));
    }
}

TEST_CASE("order 1 does not depend on the clock intensity") {
    const OptionSpec put{OptionKind::Put, 100, 0.5, 100};
    const auto a = estimate_order1(kNoDividend, put, sim(100000, 200, 2.0, 1, MollifierConfig::uniform(1.0), 31));
    const auto b = estimate_order1(kNoDividend, put, sim(100000, 200, 8.0, 1, MollifierConfig::uniform(1.0), 32));
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("black-scholes put row") {
    // y = 0.12, S0 = 100 row of the T = 3 put table: 15.252, 15.546, 15.553, 15.538, 15.518
    const OptionSpec put{OptionKind::Put, 100, 3, 100};
    const auto r = price_american(kTable1, put, sim(100000, 600, 2.0, 4, MollifierConfig{0.01, 0.01, 0.1}, 41));
    const double published[] = {15.252, 15.546, 15.553, 15.538, 15.518};
    for (int k = 0; k <= 4; ++k) {
        INFO("order " << k << ": " << r.cumulative[k] << " +/- " << r.cumulative_stderr[k]);
        CHECK(std::abs(r.cumulative[k] - published[k]) <= std::max(3.0 * r.cumulative_stderr[k], 0.01 * published[k]));
    }
}

TEST_CASE("heston put cell") {
    // T = 0.25, rho = -0.1, sigma = 0.2, S0 = 100: third order 3.481 against a benchmark of 3.475
    const HestonParams h{0.05, 0.0, 0.04, 3.0, 0.04, 0.1, -0.1};
    const OptionSpec put{OptionKind::Put, 100, 0.25, 100};
    const auto r = price_american(h, put, sim(50000, 2000, 4.0, 3, MollifierConfig::uniform(0.05), 43));
    INFO(r.cumulative[3] << " +/- " << r.cumulative_stderr[3]);
    CHECK(std::abs(r.cumulative[3] - 3.481) <= std::max(3.0 * r.cumulative_stderr[3], 0.01 * 3.475));
}

}
