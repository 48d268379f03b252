#include "fbam/european.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbam {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_price_total_variance(OptionKind kind, double s, double strike, double tau, double r,
                               double y, double total_variance) {
    const double df_r = std::exp(-r * tau);
    const double df_y = std::exp(-y * tau);
    const double fwd_s = s * df_y;
    const double fwd_k = strike * df_r;
    if (total_variance <= 0.0) {
        const double call = std::max(fwd_s - fwd_k, 0.0);
        return kind == OptionKind::Call ? call : std::max(fwd_k - fwd_s, 0.0);
    }
    const double sd = std::sqrt(total_variance);
    const double d1 = (std::log(fwd_s / fwd_k) + 0.5 * total_variance) / sd;
    const double d2 = d1 - sd;
    if (kind == OptionKind::Call) return fwd_s * normal_cdf(d1) - fwd_k * normal_cdf(d2);
    return fwd_k * normal_cdf(-d2) - fwd_s * normal_cdf(-d1);
}

double bs_price(const BlackScholesParams& params, const OptionSpec& spec, double t, double s) {
    const double tau = spec.expiry - t;
    if (tau <= 0.0) return payoff(spec, s).psi_plus;
    return bs_price_total_variance(spec.kind, s, spec.strike, tau, params.r, params.y,
                                   params.sigma * params.sigma * tau);
}

std::complex<double> heston_log_cf(const HestonParams& p, std::complex<double> u, double tau,
                                   double v) {
    using cd = std::complex<double>;
    const cd iu = cd(0.0, 1.0) * u;
    const double eta2 = p.eta * p.eta;
    const cd b = p.xi - p.rho * p.eta * iu;
    const cd q0 = iu + u * u;
    const cd d = std::sqrt(b * b + eta2 * q0);
    // b - d = -eta^2 q0 / (b + d); dividing by eta^2 analytically keeps small eta stable
    const cd q = -q0 / (b + d);      // (b - d) / eta^2
    const cd g_over = q / (b + d);   // g / eta^2 with g = (b - d) / (b + d)
    const cd g = eta2 * g_over;
    const cd e = std::exp(-d * tau);
    const cd dcoef = q * (1.0 - e) / (1.0 - g * e);
    // log((1 - g e) / (1 - g)) = log1p(x), x = g (1 - e) / (1 - g)
    const cd x_over = g_over * (1.0 - e) / (1.0 - g);
    const cd x = eta2 * x_over;
    const cd log1p_ratio = std::abs(x) < 1e-5 ? 1.0 - x / 2.0 + x * x / 3.0 : std::log(1.0 + x) / x;
    const cd ccoef = p.xi * p.theta * (q * tau - 2.0 * x_over * log1p_ratio);
    return ccoef + dcoef * v;
}

double heston_mean_total_variance(const HestonParams& p, double tau, double v) {
    const double k = p.xi * tau;
    const double frac = k < 1e-8 ? tau * (1.0 - 0.5 * k) : (1.0 - std::exp(-k)) / p.xi;
    return p.theta * tau + (v - p.theta) * frac;
}

HestonPricer::HestonPricer(HestonParams params, OptionSpec spec, FourierConfig config)
    : params_(params), spec_(spec), config_(config), rule_(static_cast<std::size_t>(config.nodes_per_panel)) {
    params_.validate();
    spec_.validate();
    if (config_.x_max <= 0.0 || config_.min_panels < 1 || config_.max_panels < config_.min_panels)
        throw std::invalid_argument("invalid Fourier configuration");
}

double HestonPricer::call_price(double t, double s, double v) const {
    const double tau = spec_.expiry - t;
    const double k = spec_.strike;
    if (tau <= 0.0) return std::max(s - k, 0.0);
    const double vp = std::max(v, 0.0);
    const double w = heston_mean_total_variance(params_, tau, vp);
    const double base = bs_price_total_variance(OptionKind::Call, s, k, tau, params_.r, params_.y, w);
    if (w < 1e-14) return base;

    const double sw = std::sqrt(w);
    const double kappa = std::log(s / k) + (params_.r - params_.y) * tau;
    const double a = std::abs(kappa) / sw;
    if (a > config_.max_moneyness) return base;
    const double width = std::min(config_.max_panel_width, a > 0.0 ? std::numbers::pi / a : 1e300);
    auto panels = static_cast<int>(std::ceil(config_.x_max / width));
    panels = std::clamp(panels, config_.min_panels, config_.max_panels);

    // integrand in x = u * sqrt(w); du = dx / sqrt(w)
    const auto integrand = [&](double x) {
        const double u = x / sw;
        const std::complex<double> z(u, -0.5);
        const double uu = u * u + 0.25;
        const std::complex<double> phi_h = std::exp(heston_log_cf(params_, z, tau, vp));
        const double phi_bs = std::exp(-0.5 * w * uu);
        const std::complex<double> osc(std::cos(u * kappa), std::sin(u * kappa));
        return (osc * (phi_h - phi_bs)).real() / uu;
    };
    const double integral = rule_.integrate(integrand, 0.0, config_.x_max, static_cast<std::size_t>(panels)) / sw;
    const double coef = std::sqrt(s * k) * std::exp(-0.5 * (params_.r + params_.y) * tau) / std::numbers::pi;
    return base - coef * integral;
}

double HestonPricer::price(double t, double s, double v) const {
    const double call = call_price(t, s, v);
    if (spec_.kind == OptionKind::Call) return call;
    const double tau = std::max(spec_.expiry - t, 0.0);
    return call - s * std::exp(-params_.y * tau) + spec_.strike * std::exp(-params_.r * tau);
}

double heston_price(const HestonParams& params, const OptionSpec& spec, double t, double s,
                    double v, const FourierConfig& config) {
    return HestonPricer(params, spec, config).price(t, s, v);
}

EuropeanPricer::EuropeanPricer(const ModelParams& model, const OptionSpec& spec, FourierConfig config)
    : model_(model), spec_(spec), impl_(BlackScholesParams{}) {
    spec_.validate();
    if (const auto* h = std::get_if<HestonParams>(&model))
        impl_.emplace<HestonPricer>(*h, spec, config);
    else {
        const auto& bs = std::get<BlackScholesParams>(model);
        bs.validate();
        impl_ = bs;
    }
}

double EuropeanPricer::operator()(double t, double s, double v) const {
    if (const auto* bs = std::get_if<BlackScholesParams>(&impl_)) return bs_price(*bs, spec_, t, s);
    return std::get<HestonPricer>(impl_).price(t, s, v);
}

}  // namespace fbam
