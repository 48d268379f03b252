#include "fbam/mollifier.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fbam {

void MollifierConfig::validate() const {
    if (!(h0 > 0.0) || !(h1 > 0.0) || !(h2 > 0.0))
        throw std::invalid_argument("mollifier bandwidths must be > 0");
}

double delta_gauss(double x, double h) {
    return std::exp(-0.5 * x * x / h) / std::sqrt(2.0 * std::numbers::pi * h);
}

double delta_prime_gauss(double x, double h) { return -(x / h) * delta_gauss(x, h); }

double delta_second_gauss(double x, double h) {
    return (x * x / (h * h) - 1.0 / h) * delta_gauss(x, h);
}

std::size_t select_bandwidth_index(std::span<const double> dispersions) {
    if (dispersions.size() < 2) throw std::invalid_argument("bandwidth grid needs at least two points");
    std::size_t best = 0;
    for (std::size_t i = 1; i < dispersions.size(); ++i) {
        if (dispersions[i] > dispersions[i - 1]) break;
        best = i;
    }
    if (best == 0) {
        bool all_increasing = true;
        for (std::size_t i = 1; i < dispersions.size(); ++i)
            all_increasing = all_increasing && dispersions[i] > dispersions[i - 1];
        if (all_increasing) throw std::domain_error("dispersion increases over the whole bandwidth grid");
    }
    return best;
}

BandwidthScan select_bandwidth(const std::function<ScanPoint(double)>& estimator,
                               std::span<const double> h_grid) {
    if (h_grid.size() < 2) throw std::invalid_argument("bandwidth grid needs at least two points");
    for (std::size_t i = 1; i < h_grid.size(); ++i)
        if (!(h_grid[i] < h_grid[i - 1])) throw std::invalid_argument("bandwidth grid must be strictly decreasing");
    BandwidthScan scan;
    std::vector<double> disp;
    for (double h : h_grid) {
        ScanPoint p = estimator(h);
        p.h = h;
        scan.points.push_back(p);
        disp.push_back(p.stderr_);
    }
    scan.selected_index = select_bandwidth_index(disp);
    scan.selected_h = h_grid[scan.selected_index];
    return scan;
}

std::vector<double> geometric_grid(double hi, double lo, std::size_t count) {
    if (count < 2 || !(hi > lo) || !(lo > 0.0)) throw std::invalid_argument("invalid geometric grid");
    std::vector<double> g(count);
    const double ratio = std::pow(lo / hi, 1.0 / static_cast<double>(count - 1));
    for (std::size_t i = 0; i < count; ++i) g[i] = hi * std::pow(ratio, static_cast<double>(i));
    g.back() = lo;
    return g;
}

void write_scan_csv(std::ostream& os, const BandwidthScan& scan) {
    os << "h,mean,stderr,selected\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        const auto& p = scan.points[i];
        os << p.h << ',' << p.mean << ',' << p.stderr_ << ',' << (i == scan.selected_index ? 1 : 0) << '\n';
    }
}

}  // namespace fbam
