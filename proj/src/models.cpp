#include "fbam/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fbam {

void BlackScholesParams::validate() const {
    if (!(r >= 0.0)) throw std::invalid_argument("bs.r must be >= 0");
    if (!(y >= 0.0)) throw std::invalid_argument("bs.y must be >= 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("bs.sigma must be >= 0");
}

void HestonParams::validate() const {
    if (!(r >= 0.0)) throw std::invalid_argument("heston.r must be >= 0");
    if (!(y >= 0.0)) throw std::invalid_argument("heston.y must be >= 0");
    if (!(v0 >= 0.0)) throw std::invalid_argument("heston.v0 must be >= 0");
    if (!(xi > 0.0)) throw std::invalid_argument("heston.xi must be > 0");
    if (!(theta > 0.0)) throw std::invalid_argument("heston.theta must be > 0");
    if (!(eta > 0.0)) throw std::invalid_argument("heston.eta must be > 0");
    if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("heston.rho must lie in [-1, 1]");
}

void OptionSpec::validate() const {
    if (!(strike > 0.0)) throw std::invalid_argument("option.strike must be > 0");
    if (!(expiry > 0.0)) throw std::invalid_argument("option.expiry must be > 0");
    if (!(spot > 0.0)) throw std::invalid_argument("option.spot must be > 0");
}

double model_rate(const ModelParams& model) {
    return std::visit([](const auto& p) { return p.r; }, model);
}

double model_dividend(const ModelParams& model) {
    return std::visit([](const auto& p) { return p.y; }, model);
}

bool is_heston(const ModelParams& model) { return std::holds_alternative<HestonParams>(model); }

std::optional<std::string> feller_warning(const ModelParams& model) {
    const auto* h = std::get_if<HestonParams>(&model);
    if (h == nullptr || h->feller_satisfied()) return std::nullopt;
    std::ostringstream os;
    os << "Feller condition violated: 2*xi*theta = " << 2.0 * h->xi * h->theta
       << " < eta^2 = " << h->eta * h->eta;
    return os.str();
}

PathState initial_state(const ModelParams& model, const OptionSpec& spec) {
    PathState s;
    s.spot = spec.spot;
    if (const auto* h = std::get_if<HestonParams>(&model)) s.variance = h->v0;
    return s;
}

Payoff payoff(const OptionSpec& spec, double s) {
    const double psi = spec.kind == OptionKind::Call ? s - spec.strike : spec.strike - s;
    return {psi, psi > 0.0 ? psi : 0.0};
}

double premium_rate(const OptionSpec& spec, double r, double y, double s) {
    const double call = y * s - r * spec.strike;
    return spec.kind == OptionKind::Call ? call : -call;
}

PathState step_bs(const BlackScholesParams& p, const PathState& state, double dt, double z) {
    PathState next = state;
    const double drift = (p.r - p.y - 0.5 * p.sigma * p.sigma) * dt;
    next.spot = state.spot * std::exp(drift + p.sigma * std::sqrt(dt) * z);
    next.t = state.t + dt;
    next.int_r = state.int_r + p.r * dt;
    return next;
}

PathState step_heston(const HestonParams& p, const PathState& state, double dt, double z1,
                      double z2) {
    PathState next = state;
    const double vp = state.variance > 0.0 ? state.variance : 0.0;
    const double sq = std::sqrt(vp * dt);
    next.spot = state.spot * std::exp((p.r - p.y - 0.5 * vp) * dt + sq * z1);
    const double zv = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * z2;
    next.variance = state.variance + p.xi * (p.theta - vp) * dt + p.eta * sq * zv;
    next.t = state.t + dt;
    next.int_r = state.int_r + p.r * dt;
    return next;
}

}  // namespace fbam
