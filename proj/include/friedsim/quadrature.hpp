// quadrature.hpp — Gauss-Legendre and trapezoid rules on finite intervals

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "friedsim/types.hpp"

namespace friedsim {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// N-point Gauss-Legendre rule on [a, b]. Nodes found by Newton iteration on
// the Legendre recurrence; accurate to machine precision for N up to ~10^5.
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    if (!(b > a)) throw std::invalid_argument("gauss_legendre: empty interval");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const std::size_t half = (n + 1) / 2;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);

    for (std::size_t i = 0; i < half; ++i) {
        // Chebyshev-like initial guess for the i-th root of P_n
        double z = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[i] = xm - xl * z;
        rule.nodes[n - 1 - i] = xm + xl * z;
        const double w = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// N-point composite trapezoid rule on [a, b], endpoints included
inline QuadratureRule uniform_trapezoid(std::size_t n, double a, double b) {
    if (n < 2) throw std::invalid_argument("uniform_trapezoid: need at least two nodes");
    if (!(b > a)) throw std::invalid_argument("uniform_trapezoid: empty interval");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        rule.nodes[j] = a + h * static_cast<double>(j);
        rule.weights[j] = (j == 0 || j == n - 1) ? 0.5 * h : h;
    }
    return rule;
}

// Panelised Gauss-Legendre integration of a complex-valued integrand.
// Each panel gets a fixed-order rule; panel widths are the caller's job.
inline Complex integrate_panels(const std::function<Complex(double)>& f,
                                const std::vector<double>& edges,
                                std::size_t points_per_panel = 16) {
    Complex total{0.0, 0.0};
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const QuadratureRule rule = gauss_legendre(points_per_panel, edges[k], edges[k + 1]);
        for (std::size_t j = 0; j < rule.size(); ++j) {
            total += rule.weights[j] * f(rule.nodes[j]);
        }
    }
    return total;
}

// Panel edges covering [a, b]: width `fine` near the focus point, growing
// geometrically away from it, capped at `coarse`.
inline std::vector<double> graded_panel_edges(double a, double b, double focus,
                                              double fine, double coarse,
                                              double growth = 1.5) {
    if (!(b > a)) throw std::invalid_argument("graded_panel_edges: empty interval");
    if (!(fine > 0.0) || !(coarse >= fine)) {
        throw std::invalid_argument("graded_panel_edges: bad panel widths");
    }
    std::vector<double> edges;
    edges.push_back(focus < a ? a : (focus > b ? b : focus));
    // walk right
    {
        double x = edges.front(), w = fine;
        while (x < b) {
            x = std::min(b, x + w);
            edges.push_back(x);
            w = std::min(coarse, w * growth);
        }
    }
    // walk left
    {
        double x = edges.front(), w = fine;
        std::vector<double> left;
        while (x > a) {
            x = std::max(a, x - w);
            left.push_back(x);
            w = std::min(coarse, w * growth);
        }
        edges.insert(edges.begin(), left.rbegin(), left.rend());
    }
    return edges;
}

} // namespace friedsim
