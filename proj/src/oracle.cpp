#include "fbam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fbam/mollifier.hpp"
#include "fbam/quadrature.hpp"

namespace fbam {

double tree_american(const BlackScholesParams& params, const OptionSpec& spec, const TreeConfig& cfg) {
    if (cfg.n_levels < 1) throw std::invalid_argument("tree needs at least one level");
    params.validate();
    spec.validate();
    const int n = cfg.n_levels;
    const double dt = spec.expiry / n;
    const double up = std::exp(params.sigma * std::sqrt(dt));
    const double down = 1.0 / up;
    const double growth = std::exp((params.r - params.y) * dt);
    double p = up == down ? 0.5 : (growth - down) / (up - down);
    p = std::clamp(p, 0.0, 1.0);
    const double disc = std::exp(-params.r * dt);

    std::vector<double> values(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double s = spec.spot * std::pow(up, 2 * j - n);
        values[j] = payoff(spec, s).psi_plus;
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = 0; j <= i; ++j) {
            const double cont = disc * (p * values[j + 1] + (1.0 - p) * values[j]);
            const double s = spec.spot * std::pow(up, 2 * j - i);
            values[j] = std::max(cont, payoff(spec, s).psi_plus);
        }
    }
    return values[0];
}

std::optional<double> exercise_boundary(const EuropeanPricer& pricer, double u) {
    const OptionSpec& spec = pricer.spec();
    if (!(u >= 0.0 && u < spec.expiry)) throw std::invalid_argument("exercise_boundary needs 0 <= u < T");
    const auto gap = [&](double log_s) {
        const double s = std::exp(log_s);
        return payoff(spec, s).psi - pricer(u, s);
    };
    double lo = std::log(spec.strike) - 18.0;
    double hi = std::log(spec.strike) + 18.0;
    double g_lo = gap(lo);
    double g_hi = gap(hi);
    const bool put = spec.kind == OptionKind::Put;
    // inside the region the gap is positive: low end for puts, high end for calls
    const double g_in = put ? g_lo : g_hi;
    const double g_out = put ? g_hi : g_lo;
    if (g_in <= 0.0 && g_out <= 0.0) return std::nullopt;
    if (g_out > 0.0) throw std::runtime_error("exercise boundary bracket failure");
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = gap(mid);
        if ((g > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

void QuadratureConfig::validate() const {
    if (time_nodes < 16 || space_nodes < 16 || grid_time < 16 || grid_space < 16)
        throw std::invalid_argument("quadrature node counts must be >= 16");
    if (!(truncation >= 5.0)) throw std::invalid_argument("quadrature truncation must be >= 5 sigma");
    if (delta_variance && !(*delta_variance > 0.0)) throw std::invalid_argument("delta variance must be > 0");
}

double region_premium(const BlackScholesParams& params, const OptionSpec& spec, double s, double tau,
                      std::optional<double> boundary) {
    if (!boundary) return 0.0;
    const double b = *boundary;
    const bool put = spec.kind == OptionKind::Put;
    const double c_unit = put ? 1.0 : -1.0;  // C = c_unit * (rK - yS)
    if (tau <= 0.0 || params.sigma == 0.0) {
        const double st = s * std::exp((params.r - params.y) * std::max(tau, 0.0));
        const bool inside = put ? st < b : st > b;
        return inside ? premium_rate(spec, params.r, params.y, st) : 0.0;
    }
    const double sd = params.sigma * std::sqrt(tau);
    const double d1 = (std::log(s / b) + (params.r - params.y + 0.5 * params.sigma * params.sigma) * tau) / sd;
    const double d2 = d1 - sd;
    const double fwd = s * std::exp((params.r - params.y) * tau);
    // put region {S < b}: P = N(-d2), E[S; region] = fwd N(-d1); call region uses N(d2), N(d1)
    const double prob = put ? normal_cdf(-d2) : normal_cdf(d2);
    const double partial = put ? fwd * normal_cdf(-d1) : fwd * normal_cdf(d1);
    return c_unit * (params.r * spec.strike * prob - params.y * partial);
}

namespace {

/// Boundaries on the Gauss-Legendre nodes of w = T - s^2, s in [0, sqrt(T - t)].
struct TimeRule {
    std::vector<double> w;        // absolute times
    std::vector<double> weight;   // includes the Jacobian 2s
    std::vector<std::optional<double>> boundary;
};

TimeRule make_time_rule(const EuropeanPricer& pricer, const GaussLegendre& gl, double t) {
    const double expiry = pricer.spec().expiry;
    const double smax = std::sqrt(expiry - t);
    TimeRule rule;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double sv = 0.5 * smax * (gl.nodes[i] + 1.0);
        const double w = expiry - sv * sv;
        rule.w.push_back(w);
        rule.weight.push_back(0.5 * smax * gl.weights[i] * 2.0 * sv);
        rule.boundary.push_back(w < expiry ? exercise_boundary(pricer, w) : std::nullopt);
    }
    return rule;
}

double integrate_v1(const BlackScholesParams& params, const OptionSpec& spec, const TimeRule& rule, double t,
                    double s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.w.size(); ++i) {
        const double tau = rule.w[i] - t;
        sum += rule.weight[i] * std::exp(-params.r * tau) * region_premium(params, spec, s, tau, rule.boundary[i]);
    }
    return sum;
}

}  // namespace

double quadrature_v1(const BlackScholesParams& params, const OptionSpec& spec, const QuadratureConfig& cfg,
                     double t, double s) {
    cfg.validate();
    if (s <= 0.0) s = spec.spot;
    if (t >= spec.expiry) return 0.0;
    const EuropeanPricer pricer(params, spec);
    const GaussLegendre gl(static_cast<std::size_t>(cfg.time_nodes));
    return integrate_v1(params, spec, make_time_rule(pricer, gl, t), t, s);
}

double quadrature_v2(const BlackScholesParams& params, const OptionSpec& spec, const QuadratureConfig& cfg) {
    cfg.validate();
    const EuropeanPricer pricer(params, spec);
    const double expiry = spec.expiry;
    const double sig = params.sigma;
    const double drift = params.r - params.y - 0.5 * sig * sig;
    const double s0 = spec.spot;

    // V1(u, S) on a (u, log S) grid, bilinear interpolation in between
    const int nu = cfg.grid_time;
    const int ns = cfg.grid_space;
    const double spread = (cfg.truncation + 1.0) * std::max(sig * std::sqrt(expiry), 1e-8);
    const double x_lo = std::log(s0) + std::min(drift * expiry, 0.0) - spread;
    const double x_hi = std::log(s0) + std::max(drift * expiry, 0.0) + spread;
    const double du = expiry / (nu - 1);
    const double dx = (x_hi - x_lo) / (ns - 1);
    const GaussLegendre gl_time(static_cast<std::size_t>(cfg.time_nodes));
    std::vector<double> v1(static_cast<std::size_t>(nu) * ns, 0.0);
    for (int i = 0; i < nu - 1; ++i) {
        const double u = i * du;
        const TimeRule rule = make_time_rule(pricer, gl_time, u);
        for (int j = 0; j < ns; ++j)
            v1[static_cast<std::size_t>(i) * ns + j] = integrate_v1(params, spec, rule, u, std::exp(x_lo + j * dx));
    }
    const auto v1_at = [&](double u, double s) {
        const double fu = std::clamp(u / du, 0.0, nu - 1.0);
        const double fx = std::clamp((std::log(s) - x_lo) / dx, 0.0, ns - 1.0);
        const int iu = std::min(static_cast<int>(fu), nu - 2);
        const int ix = std::min(static_cast<int>(fx), ns - 2);
        const double au = fu - iu;
        const double ax = fx - ix;
        const auto at = [&](int a, int b) { return v1[static_cast<std::size_t>(a) * ns + b]; };
        return (1 - au) * ((1 - ax) * at(iu, ix) + ax * at(iu, ix + 1)) +
               au * ((1 - ax) * at(iu + 1, ix) + ax * at(iu + 1, ix + 1));
    };

    const GaussLegendre gl_space(16);
    const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.space_nodes) / 16);
    const double inv_sqrt_2pi = 0.3989422804014327;
    const double lz = cfg.truncation;
    const auto inner = [&](double u) {
        const double sd = sig * std::sqrt(u);
        const auto f = [&](double z) {
            const double s = s0 * std::exp(drift * u + sd * z);
            const double h = cfg.delta_variance ? *cfg.delta_variance : 1e-4 * s * s;
            const double x = payoff(spec, s).psi - pricer(u, s);
            const double dens = inv_sqrt_2pi * std::exp(-0.5 * z * z);
            return dens * premium_rate(spec, params.r, params.y, s) * delta_gauss(x, h) * v1_at(u, s);
        };
        if (sd == 0.0) return f(0.0);
        return gl_space.integrate(f, -lz, lz, panels);
    };
    // outer time integral with u = T - s^2 to absorb the sqrt behaviour near expiry
    const double smax = std::sqrt(expiry);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl_time.nodes.size(); ++i) {
        const double sv = 0.5 * smax * (gl_time.nodes[i] + 1.0);
        const double u = expiry - sv * sv;
        const double weight = 0.5 * smax * gl_time.weights[i] * 2.0 * sv;
        sum += weight * std::exp(-params.r * u) * inner(u);
    }
    return -sum;
}

}  // namespace fbam
