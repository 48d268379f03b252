#pragma once

#include <complex>
#include <variant>

#include "fbam/models.hpp"
#include "fbam/quadrature.hpp"

namespace fbam {

double normal_cdf(double x);

/// Black-Scholes price with continuous dividend yield at time t (time to expiry T - t).
double bs_price(const BlackScholesParams& params, const OptionSpec& spec, double t, double s);

/// Same as bs_price but parameterized by the total variance over the remaining life.
double bs_price_total_variance(OptionKind kind, double s, double strike, double tau, double r,
                               double y, double total_variance);

/// Settings of the Heston Fourier integral. The integration variable is scaled by the
/// square root of the expected integrated variance, so `x_max` is in standard-deviation units.
struct FourierConfig {
    double x_max = 10.0;
    int nodes_per_panel = 8;
    int min_panels = 6;
    int max_panels = 2048;
    /// Maximum panel width in the scaled variable (resolves the e^{iuk} oscillation).
    double max_panel_width = 2.0;
    /// Beyond this |log-moneyness| in standard deviations the Black-Scholes control variate
    /// alone is returned.
    double max_moneyness = 12.0;
};

/// Log of E[exp(iu X)] where X = ln(S_tau / S_0) - (r - y) tau under Heston.
std::complex<double> heston_log_cf(const HestonParams& p, std::complex<double> u, double tau,
                                   double v);

/// Expected integrated variance E[int_0^tau v_s ds] starting from v.
double heston_mean_total_variance(const HestonParams& p, double tau, double v);

/// Semi-analytic Heston price: Lewis single-integral form with a Black-Scholes control
/// variate at the expected integrated variance. Puts via put-call parity.
class HestonPricer {
public:
    HestonPricer(HestonParams params, OptionSpec spec, FourierConfig config = {});

    double price(double t, double s, double v) const;
    double call_price(double t, double s, double v) const;

    const HestonParams& params() const { return params_; }

private:
    HestonParams params_;
    OptionSpec spec_;
    FourierConfig config_;
    GaussLegendre rule_;
};

double heston_price(const HestonParams& params, const OptionSpec& spec, double t, double s,
                    double v, const FourierConfig& config = {});

/// v0(t, S[, v]) for either model. Immutable after construction.
class EuropeanPricer {
public:
    EuropeanPricer(const ModelParams& model, const OptionSpec& spec, FourierConfig config = {});

    double operator()(double t, double s, double v = 0.0) const;
    double operator()(const PathState& x) const { return (*this)(x.t, x.spot, x.variance); }

    const OptionSpec& spec() const { return spec_; }
    const ModelParams& model() const { return model_; }

private:
    ModelParams model_;
    OptionSpec spec_;
    std::variant<BlackScholesParams, HestonPricer> impl_;
};

}  // namespace fbam
