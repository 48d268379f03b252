#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace fbam {

/// Gaussian mollifier bandwidths, each the variance (currency^2) of the normal density
/// standing in for the Dirac delta. h0 is used for delta, h1 for its first derivative,
/// h2 for its second derivative.
struct MollifierConfig {
    double h0 = 1.0;
    double h1 = 1.0;
    double h2 = 1.0;

    static MollifierConfig uniform(double h) { return {h, h, h}; }
    void validate() const;
};

/// Heaviside step; the boundary point itself is outside the exercise region.
inline double theta_step(double x) { return x > 0.0 ? 1.0 : 0.0; }

double delta_gauss(double x, double h);
double delta_prime_gauss(double x, double h);
double delta_second_gauss(double x, double h);

/// One point of a bandwidth scan.
struct ScanPoint {
    double h;
    double mean;
    double stderr_;
};

struct BandwidthScan {
    std::vector<ScanPoint> points;
    double selected_h;
    std::size_t selected_index;
};

/// Picks the smallest h such that the dispersion has not increased relative to the
/// previous (larger) h. `h_grid` must be strictly decreasing with at least two entries.
/// Throws std::domain_error if the dispersion increases at every step.
std::size_t select_bandwidth_index(std::span<const double> dispersions);

/// Runs `estimator(h)` for each h of the grid and applies select_bandwidth_index to the
/// reported standard errors.
BandwidthScan select_bandwidth(const std::function<ScanPoint(double)>& estimator,
                               std::span<const double> h_grid);

/// Geometric grid from hi down to lo with `count` points.
std::vector<double> geometric_grid(double hi, double lo, std::size_t count);

void write_scan_csv(std::ostream& os, const BandwidthScan& scan);

}  // namespace fbam
