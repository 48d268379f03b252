#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>
#include <vector>

#include "fbam/mollifier.hpp"
#include "fbam/particle.hpp"
#include "fbam/quadrature.hpp"

using namespace fbam;

TEST_SUITE("mollifier") {

TEST_CASE("step function") {
    CHECK(theta_step(2.5) == 1.0);
    CHECK(theta_step(-0.1) == 0.0);
    CHECK(theta_step(0.0) == 0.0);
}

TEST_CASE("gaussian kernel values") {
    CHECK(delta_gauss(0.0, 1.0) == doctest::Approx(0.398942).epsilon(1e-6));
    CHECK(delta_gauss(1.0, 1.0) == delta_gauss(-1.0, 1.0));
    CHECK(delta_prime_gauss(0.0, 0.3) == 0.0);
    CHECK(delta_second_gauss(0.0, 1.0) == doctest::Approx(-0.398942).epsilon(1e-6));
    for (double x : {-30.0, -1.0, 0.0, 0.5, 7.0}) CHECK(delta_gauss(x, 0.01) >= 0.0);
}

TEST_CASE("kernel integrates to one") {
    const GaussLegendre gl(32);
    for (double h : {1e-4, 0.01, 1.0, 100.0}) {
        const double a = 10.0 * std::sqrt(h);
        CHECK(std::abs(gl.integrate([&](double x) { return delta_gauss(x, h); }, -a, a, 16) - 1.0) <= 1e-6);
    }
}

TEST_CASE("derivatives match finite differences") {
    for (double h : {0.05, 1.0, 4.0})
        for (double x : {-1.3, -0.2, 0.4, 2.0}) {
            double prev1 = 1e9, prev2 = 1e9;
            for (double e : {1e-2, 5e-3, 2.5e-3}) {
                const double fd1 = (delta_gauss(x + e, h) - delta_gauss(x - e, h)) / (2 * e);
                const double fd2 = (delta_prime_gauss(x + e, h) - delta_prime_gauss(x - e, h)) / (2 * e);
                const double err1 = std::abs(fd1 - delta_prime_gauss(x, h));
                const double err2 = std::abs(fd2 - delta_second_gauss(x, h));
                // second-order accuracy: halving e cuts the error by about four
                if (prev1 < 1e9 && prev1 > 1e-11) CHECK(err1 < 0.3 * prev1);
                if (prev2 < 1e9 && prev2 > 1e-11) CHECK(err2 < 0.3 * prev2);
                prev1 = err1;
                prev2 = err2;
            }
        }
}

TEST_CASE("mollified step tends to the step") {
    const GaussLegendre gl(32);
    for (double x : {-0.5, 0.5, 2.0}) {
        double prev = 1e9;
        for (double h : {1.0, 0.1, 0.01, 1e-3}) {
            const double lo = -12.0 * std::sqrt(h) + std::min(x, 0.0);
            const double cdf = gl.integrate([&](double u) { return delta_gauss(u, h); }, lo, x, 64);
            const double err = std::abs(cdf - theta_step(x));
            CHECK(err <= prev);
            prev = err;
        }
        CHECK(prev < 1e-6);
    }
}

TEST_CASE("sifting error is first order in h") {
    const GaussLegendre gl(32);
    const auto f = [](double x) { return 2.0 + x - 3.0 * x * x + x * x * x * x; };
    for (double h : {0.1, 0.01, 0.001}) {
        const double a = 12.0 * std::sqrt(h);
        const double got = gl.integrate([&](double x) { return f(x) * delta_gauss(x, h); }, -a, a, 16);
        // E[f(X)] - f(0) = -3h + 3h^2 for X ~ N(0, h)
        CHECK(got - f(0.0) == doctest::Approx(-3.0 * h + 3.0 * h * h).epsilon(1e-8));
        CHECK(std::abs(got - f(0.0)) <= 3.1 * h);
    }
}

TEST_CASE("bandwidth selection rule") {
    const std::vector<double> d1{1.0, 0.9, 0.9, 1.5};
    CHECK(select_bandwidth_index(d1) == 2);
    const std::vector<double> d2{1.0, 0.8};
    CHECK(select_bandwidth_index(d2) == 1);
    const std::vector<double> d3{1.0, 1.2, 0.5};
    CHECK(select_bandwidth_index(d3) == 0);
    const std::vector<double> d4{1.0, 1.2, 1.5};
    CHECK_THROWS_AS(select_bandwidth_index(d4), std::domain_error);
    const std::vector<double> d5{1.0};
    CHECK_THROWS_AS(select_bandwidth_index(d5), std::invalid_argument);

    const std::vector<double> grid{4, 2, 1, 0.5};
    int calls = 0;
    const auto scan = select_bandwidth(
        [&](double h) {
            ++calls;
            return ScanPoint{h, 0.0, d1[static_cast<std::size_t>(calls - 1)]};
        },
        grid);
    CHECK(scan.selected_h == 1.0);
    CHECK(scan.points.size() == 4);
    const std::vector<double> bad_grid{1, 2};
    CHECK_THROWS_AS(select_bandwidth([](double h) { return ScanPoint{h, 0, 0}; }, bad_grid), std::invalid_argument);

    std::ostringstream os;
    write_scan_csv(os, scan);
    CHECK(os.str().rfind("h,mean,stderr,selected\n4,0,1,0\n2,0,0.90000000000000002,0\n1,", 0) == 0);
}

TEST_CASE("geometric grid") {
    const auto g = geometric_grid(100.0, 0.01, 5);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 100.0);
    CHECK(g[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g[4] == 0.01);
    CHECK_THROWS_AS(geometric_grid(1.0, 2.0, 3), std::invalid_argument);
}

TEST_CASE("scan on the order-3 put lands on a stable plateau") {
    const BlackScholesParams bs{0.08, 0.08, 0.2};
    const OptionSpec spec{OptionKind::Put, 100, 3, 100};
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.n_steps = 600;
    cfg.lambda = 2.0;
    cfg.order = 3;
    cfg.seed = 3;
    const auto grid = geometric_grid(100.0, 0.01, 9);
    const auto scan = select_bandwidth(
        [&](double h) {
            SimConfig c = cfg;
            c.mollifier = MollifierConfig::uniform(h);
            const auto r = price_american(bs, spec, c);
            return ScanPoint{h, r.cumulative[3], r.cumulative_stderr[3]};
        },
        grid);
    const auto i = scan.selected_index;
    const auto& sel = scan.points[i];
    MESSAGE("selected h = " << sel.h << ", price " << sel.mean << " +/- " << sel.stderr_);
    for (std::size_t j : {i - 1, i + 1}) {
        if (j >= scan.points.size()) continue;  // also skips i - 1 when i == 0
        const auto& nb = scan.points[j];
        CHECK(std::abs(sel.mean - nb.mean) <= 3.0 * std::hypot(sel.stderr_, nb.stderr_));
    }
}

}
