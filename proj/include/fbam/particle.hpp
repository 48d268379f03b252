#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fbam/european.hpp"
#include "fbam/models.hpp"
#include "fbam/mollifier.hpp"
#include "fbam/rng.hpp"

namespace fbam {

inline constexpr int kMaxOrder = 4;

struct SimConfig {
    std::uint64_t n_paths = 10000;
    int n_steps = 100;          ///< uniform grid on [0, T]
    double lambda = 2.0;        ///< constant interaction intensity per year
    int order = 3;              ///< highest expansion order, 0..4
    MollifierConfig mollifier;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Each order draws its own random numbers instead of sharing the forward paths.
    bool independent_orders = false;
    FourierConfig fourier;

    void validate() const;
};

/// Interaction times of one particle. `nodes[i]` is the grid node whose state is used
/// for `times[i]` (the last node at or before the exact time).
struct JumpSchedule {
    std::vector<double> times;
    std::vector<int> nodes;
};

/// Inverse CDF of the exponential clock: t - ln(u) / lambda.
inline double jump_after(double t, double u, double lambda) { return t - std::log(u) / lambda; }

/// jump_after(t, U, lambda) with U uniform on (0, 1] drawn from `clock`.
double draw_next_jump(RandomStream& clock, double t, double lambda);

/// Exponential inter-arrivals from t until T or `max_jumps` times, snapped to the grid.
JumpSchedule draw_jump_schedule(RandomStream& clock, double t, double expiry, double lambda,
                                double dt, int n_steps, int max_jumps);

/// (1 / lambda) exp(lambda (tau - tau_prev)) C_tau for constant lambda.
double chat_weight(double tau_prev, double tau, double c_at_tau, double lambda);

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct ExpansionResult {
    int order = 0;
    std::uint64_t n_paths = 0;
    std::vector<double> mean;               ///< V^(0) .. V^(order)
    std::vector<double> stderr_;
    std::vector<double> cumulative;         ///< sum_{i <= k} V^(i) at epsilon = 1
    std::vector<double> cumulative_stderr;  ///< standard error of the cumulative estimator
};

/// Per-path contributions of orders 1..4 (index 0 unused) for one path index.
using PathContribution = std::array<double, kMaxOrder + 1>;

/// Sub-stream identifiers used by one path: {main, offspring A, offspring B, offspring D} x
/// {diffusion, clock}. `salt` separates the per-order streams when orders are run independently.
std::array<StreamId, 8> path_streams(std::uint64_t seed, std::uint64_t path, int salt = 0);

/// Monte Carlo engine for the early-exercise premium expansion.
class ParticleEngine {
public:
    ParticleEngine(ModelParams model, OptionSpec spec, SimConfig config);

    /// Deterministic in (seed, config, model, spec), independent of the worker count.
    ExpansionResult run() const;

    PathContribution path_contribution(std::uint64_t path) const;

    const EuropeanPricer& european() const { return european_; }
    const SimConfig& config() const { return config_; }

private:
    ModelParams model_;
    OptionSpec spec_;
    SimConfig config_;
    EuropeanPricer european_;
};

Estimate estimate_order1(const ModelParams& model, const OptionSpec& spec, SimConfig config);
Estimate estimate_order2(const ModelParams& model, const OptionSpec& spec, SimConfig config);
Estimate estimate_order3(const ModelParams& model, const OptionSpec& spec, SimConfig config);
Estimate estimate_order4(const ModelParams& model, const OptionSpec& spec, SimConfig config);

/// European price plus the order 1..config.order premium terms.
ExpansionResult price_american(const ModelParams& model, const OptionSpec& spec,
                               const SimConfig& config);

}  // namespace fbam
