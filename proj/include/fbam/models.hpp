#pragma once

#include <optional>
#include <string>
#include <variant>

namespace fbam {

enum class OptionKind { Call, Put };

/// Black-Scholes dynamics dS/S = (r - y) dt + sigma dW with constant coefficients.
struct BlackScholesParams {
    double r = 0.0;      ///< risk-free rate per year
    double y = 0.0;      ///< continuous dividend yield per year
    double sigma = 0.0;  ///< volatility per sqrt-year

    void validate() const;
};

/// Heston dynamics. v0 is the initial variance (sigma^2 at t = 0).
struct HestonParams {
    double r = 0.0;
    double y = 0.0;
    double v0 = 0.0;
    double xi = 0.0;     ///< mean-reversion speed
    double theta = 0.0;  ///< long-run variance
    double eta = 0.0;    ///< vol-of-vol
    double rho = 0.0;

    void validate() const;
    /// 2 xi theta >= eta^2
    bool feller_satisfied() const { return 2.0 * xi * theta >= eta * eta; }
};

using ModelParams = std::variant<BlackScholesParams, HestonParams>;

double model_rate(const ModelParams& model);
double model_dividend(const ModelParams& model);
bool is_heston(const ModelParams& model);

/// Returns a human-readable warning when the Heston parameters violate Feller.
std::optional<std::string> feller_warning(const ModelParams& model);

struct OptionSpec {
    OptionKind kind = OptionKind::Put;
    double strike = 100.0;
    double expiry = 1.0;
    double spot = 100.0;

    void validate() const;
};

/// Simulation state of one particle. `variance` is unused (zero) under BS.
struct PathState {
    double t = 0.0;
    double spot = 0.0;
    double variance = 0.0;
    double int_r = 0.0;  ///< accumulated integral of r over [0, t]
};

PathState initial_state(const ModelParams& model, const OptionSpec& spec);

struct Payoff {
    double psi;       ///< signed intrinsic value
    double psi_plus;  ///< max(psi, 0)
};

Payoff payoff(const OptionSpec& spec, double s);

/// Instantaneous early exercise premium rate: yS - rK (call), rK - yS (put).
double premium_rate(const OptionSpec& spec, double r, double y, double s);

/// Exact lognormal step.
PathState step_bs(const BlackScholesParams& p, const PathState& state, double dt, double z);

/// Full-truncation Euler step; the log-spot update keeps the spot positive.
PathState step_heston(const HestonParams& p, const PathState& state, double dt, double z1,
                      double z2);

}  // namespace fbam
