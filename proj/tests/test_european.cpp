#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fbam/european.hpp"
#include "fbam/rng.hpp"

using namespace fbam;

namespace {

const BlackScholesParams kTable1{0.08, 0.12, 0.2};

HestonParams table4(double sigma, double rho) { return {0.05, 0.0, sigma * sigma, 3.0, 0.04, 0.1, rho}; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("european") {

TEST_CASE("black-scholes reference values") {
    CHECK(bs_price(kTable1, {OptionKind::Put, 100, 3, 100}, 0.0, 100.0) == doctest::Approx(15.252).epsilon(3.3e-5));
    CHECK(bs_price(kTable1, {OptionKind::Put, 100, 3, 80}, 0.0, 80.0) == doctest::Approx(24.777).epsilon(2.1e-5));
    CHECK(bs_price(kTable1, {OptionKind::Put, 100, 3, 80}, 3.0, 80.0) == 20.0);
    CHECK(bs_price(kTable1, {OptionKind::Call, 100, 3, 80}, 3.0, 80.0) == 0.0);
}

TEST_CASE("black-scholes parity") {
    for (const auto& p : {kTable1, BlackScholesParams{0.03, 0.07, 0.4}, BlackScholesParams{0.0, 0.0, 0.3}})
        for (double T : {0.1, 0.5, 3.0})
            for (double s : {60.0, 95.0, 100.0, 130.0, 200.0}) {
                const double c = bs_price(p, {OptionKind::Call, 100, T, s}, 0.0, s);
                const double q = bs_price(p, {OptionKind::Put, 100, T, s}, 0.0, s);
                const double fwd = s * std::exp(-p.y * T) - 100.0 * std::exp(-p.r * T);
                CHECK(std::abs(c - q - fwd) <= 1e-8 * std::max({c, q, std::abs(fwd)}));
            }
}

TEST_CASE("heston matches the published 0th column") {
    const OptionSpec put{OptionKind::Put, 100, 0.25, 100};
    // The published column uses an asymptotic approximation, so agreement is to ~0.01.
    CHECK(heston_price(table4(0.2, -0.1), put, 0.0, 100.0, 0.04) == doctest::Approx(3.374).epsilon(0.01 / 3.374));
    CHECK(heston_price(table4(0.2, -0.1), put, 0.0, 90.0, 0.04) == doctest::Approx(9.643).epsilon(0.01 / 9.643));
    CHECK(heston_price(table4(0.4, -0.7), {OptionKind::Put, 100, 0.5, 100}, 0.0, 100.0, 0.16) ==
          doctest::Approx(7.705).epsilon(0.01 / 7.705));
}

TEST_CASE("heston parity") {
    for (double rho : {-0.9, -0.1, 0.5})
        for (double T : {0.1, 0.5, 2.0})
            for (double s : {70.0, 90.0, 100.0, 115.0, 150.0}) {
                HestonParams p = table4(0.3, rho);
                p.y = 0.02;
                p.eta = 0.4;
                const double c = heston_price(p, {OptionKind::Call, 100, T, s}, 0.0, s, p.v0);
                const double q = heston_price(p, {OptionKind::Put, 100, T, s}, 0.0, s, p.v0);
                const double fwd = s * std::exp(-p.y * T) - 100.0 * std::exp(-p.r * T);
                CHECK(std::abs(c - q - fwd) <= 1e-5 * std::max({c, q, std::abs(fwd)}));
            }
}

TEST_CASE("heston collapses to black-scholes as vol-of-vol vanishes") {
    for (double T : {0.25, 1.0, 3.0})
        for (double s : {80.0, 100.0, 120.0})
            for (auto kind : {OptionKind::Put, OptionKind::Call}) {
                HestonParams h = table4(0.2, -0.7);
                h.eta = 1e-7;
                h.y = 0.03;
                const OptionSpec spec{kind, 100, T, s};
                const double bs = bs_price({h.r, h.y, 0.2}, spec, 0.0, s);
                CHECK(rel(heston_price(h, spec, 0.0, s, 0.04), bs) <= 1e-4);
            }
}

TEST_CASE("monotone in spot") {
    const HestonParams h = table4(0.2, -0.7);
    for (auto kind : {OptionKind::Put, OptionKind::Call}) {
        const EuropeanPricer bs(kTable1, {kind, 100, 3, 100});
        const EuropeanPricer hs(h, {kind, 100, 0.5, 100});
        double prev_bs = bs(0.0, 40.0), prev_hs = hs(0.0, 40.0, 0.04);
        for (double s = 41.0; s <= 250.0; s += 1.0) {
            const double b = bs(0.0, s), v = hs(0.0, s, 0.04);
            if (kind == OptionKind::Put) {
                CHECK(b <= prev_bs);
                CHECK(v <= prev_hs + 1e-9);
            } else {
                CHECK(b >= prev_bs);
                CHECK(v >= prev_hs - 1e-9);
            }
            prev_bs = b;
            prev_hs = v;
        }
    }
}

TEST_CASE("prices are non-negative and above the discounted intrinsic bound") {
    const HestonParams h = table4(0.4, -0.1);
    for (auto kind : {OptionKind::Put, OptionKind::Call}) {
        const OptionSpec spec{kind, 100, 0.5, 100};
        const EuropeanPricer hs(h, spec);
        for (double s = 20.0; s <= 400.0; s *= 1.1) {
            const double v = hs(0.0, s, h.v0);
            const double fwd = s * std::exp(-h.y * 0.5) - 100.0 * std::exp(-h.r * 0.5);
            CHECK(v >= 0.0);
            CHECK(v >= (kind == OptionKind::Call ? fwd : -fwd) - 1e-8);
        }
    }
}

TEST_CASE("convergence to payoff near expiry") {
    const HestonParams h = table4(0.2, -0.1);
    for (auto kind : {OptionKind::Put, OptionKind::Call}) {
        const OptionSpec spec{kind, 100, 1.0, 100};
        const EuropeanPricer bs(kTable1, spec), hs(h, spec);
        double prev_err = 1e9;
        for (double tau : {1e-1, 1e-2, 1e-3, 1e-4}) {
            double err = 0.0;
            for (double s : {70.0, 80.0, 90.0, 110.0, 120.0, 130.0}) {
                const double payoff_value = payoff(spec, s).psi_plus;
                err = std::max({err, std::abs(bs(1.0 - tau, s) - payoff_value),
                                std::abs(hs(1.0 - tau, s, 0.04) - payoff_value)});
            }
            CHECK(err < prev_err);
            prev_err = err;
        }
        CHECK(prev_err < 0.02);
    }
}

TEST_CASE("heston fourier price agrees with monte carlo") {
    const HestonParams p = table4(0.2, -0.7);
    const OptionSpec spec{OptionKind::Put, 100, 0.25, 100};
    const int n = 100000, steps = 200;
    const double dt = spec.expiry / steps;
    RandomStream rs(StreamId{23, 0, 0});
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        PathState s{0.0, spec.spot, p.v0, 0.0};
        for (int k = 0; k < steps; ++k) {
            const double z1 = rs.normal();
            const double z2 = rs.normal();
            s = step_heston(p, s, dt, z1, z2);
        }
        const double x = std::exp(-s.int_r) * payoff(spec, s.spot).psi_plus;
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    const double ref = heston_price(p, spec, 0.0, spec.spot, p.v0);
    CHECK(std::abs(mean - ref) < 3.0 * se);
}

TEST_CASE("european pricer dispatch") {
    const OptionSpec spec{OptionKind::Put, 100, 3, 100};
    const EuropeanPricer bs(kTable1, spec);
    CHECK(bs(0.0, 100.0) == bs_price(kTable1, spec, 0.0, 100.0));
    CHECK(bs(PathState{1.0, 90.0, 0.0, 0.08}) == bs_price(kTable1, spec, 1.0, 90.0));
    const HestonParams h = table4(0.2, -0.1);
    const EuropeanPricer hs(h, spec);
    CHECK(hs(0.5, 95.0, 0.05) == heston_price(h, spec, 0.5, 95.0, 0.05));
    // negative variances (truncated Euler states) are priced at zero variance
    CHECK(hs(0.5, 95.0, -0.01) == hs(0.5, 95.0, 0.0));
}

}
