#pragma once

#include <optional>

#include "fbam/european.hpp"
#include "fbam/models.hpp"

namespace fbam {

struct TreeConfig {
    int n_levels = 2000;
};

/// Cox-Ross-Rubinstein lattice with dividend yield and early exercise at every node.
double tree_american(const BlackScholesParams& params, const OptionSpec& spec, const TreeConfig& cfg = {});

/// Root b(u) of Psi(S) - v0(u, S) = 0. The exercise region is {S < b} for a put and
/// {S > b} for a call. Returns nullopt when the region is empty; throws std::runtime_error
/// when the sign pattern over the bracket is inconsistent with a single boundary.
std::optional<double> exercise_boundary(const EuropeanPricer& pricer, double u);

struct QuadratureConfig {
    int time_nodes = 64;         ///< Gauss-Legendre nodes of each outer time integral
    double truncation = 8.0;     ///< spatial range in standard deviations of log S
    int space_nodes = 1024;      ///< spatial Gauss-Legendre nodes (order-2 integral)
    int grid_time = 120;         ///< time nodes of the interpolated V1(u, S) grid
    int grid_space = 400;        ///< log-spot nodes of the interpolated V1(u, S) grid
    /// Variance of the normal density replacing delta; nullopt means 1e-4 * S^2 (1bp of S).
    std::optional<double> delta_variance;

    void validate() const;
};

/// E[C(S_{u+tau}) 1{S_{u+tau} in exercise region} | S_u = s] for the region bounded by
/// `boundary` (nullopt = empty region). Closed form for the lognormal transition.
double region_premium(const BlackScholesParams& params, const OptionSpec& spec, double s, double tau,
                      std::optional<double> boundary);

/// V1(t, s): time integral of the discounted premium rate over the exercise region.
double quadrature_v1(const BlackScholesParams& params, const OptionSpec& spec, const QuadratureConfig& cfg = {},
                     double t = 0.0, double s = -1.0);

/// V2(0, S0) by brute-force integration with the delta replaced by a normal density.
double quadrature_v2(const BlackScholesParams& params, const OptionSpec& spec, const QuadratureConfig& cfg = {});

}  // namespace fbam
