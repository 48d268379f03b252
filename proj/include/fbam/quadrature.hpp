#pragma once

#include <cstddef>
#include <vector>

namespace fbam {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n);

    /// Integrates f over [a, b] with this rule.
    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
        return half * sum;
    }

    /// Composite rule: `panels` equal sub-intervals of [a, b].
    template <class F>
    double integrate(F&& f, double a, double b, std::size_t panels) const {
        const double w = (b - a) / static_cast<double>(panels);
        double sum = 0.0;
        for (std::size_t k = 0; k < panels; ++k) sum += integrate(f, a + w * k, a + w * (k + 1));
        return sum;
    }
};

}  // namespace fbam
