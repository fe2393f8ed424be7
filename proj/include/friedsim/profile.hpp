// profile.hpp — Parametric and tabulated reservoir form factors |g(ω)|²

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "friedsim/types.hpp"

namespace friedsim {

enum class ProfileKind { Lorentzian, Gaussian, Tabulated };

// Frequency support of the profile. Physical profiles live on [0, ∞);
// Extended ones are the analytically solvable idealisation on (-∞, ∞) and
// unlock the closed-form correlation / resolvent continuation.
enum class Support { Physical, Extended };

// A single reservoir channel's form factor. The stored quantity is the
// spectral density |g(ω)|², normalised so that the extended-support integral
// of a parametric profile equals strength².
struct SpectralProfile {
    ProfileKind kind = ProfileKind::Lorentzian;
    Support support = Support::Physical;

    // parametric kinds
    double strength = 1.0;   // g
    double width = 1.0;      // κ (Lorentzian half-width) or σ (Gaussian)
    double center = 0.0;     // μ

    // tabulated kind: |g(ω_j)|² at strictly ascending nodes ≥ 0
    std::vector<double> nodes;
    std::vector<double> values;

    static SpectralProfile lorentzian(double g, double kappa, double mu,
                                      Support s = Support::Physical) {
        SpectralProfile p;
        p.kind = ProfileKind::Lorentzian;
        p.support = s;
        p.strength = g;
        p.width = kappa;
        p.center = mu;
        return p;
    }

    static SpectralProfile gaussian(double g, double sigma, double mu,
                                    Support s = Support::Physical) {
        SpectralProfile p;
        p.kind = ProfileKind::Gaussian;
        p.support = s;
        p.strength = g;
        p.width = sigma;
        p.center = mu;
        return p;
    }

    static SpectralProfile tabulated(std::vector<double> omega,
                                     std::vector<double> density_values) {
        SpectralProfile p;
        p.kind = ProfileKind::Tabulated;
        p.support = Support::Physical;
        p.nodes = std::move(omega);
        p.values = std::move(density_values);
        return p;
    }

    std::vector<std::string> invariant_violations() const {
        std::vector<std::string> out;
        if (kind == ProfileKind::Tabulated) {
            if (nodes.size() < 2 || nodes.size() != values.size()) {
                out.push_back("tabulated profile needs matching node/value lists (>= 2 entries)");
                return out;
            }
            if (nodes.front() < 0.0) out.push_back("tabulated nodes must be >= 0");
            for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
                if (!(nodes[j] < nodes[j + 1])) {
                    out.push_back("tabulated nodes must be strictly ascending");
                    break;
                }
            }
            for (double v : values) {
                if (v < 0.0) {
                    out.push_back("tabulated values must be non-negative");
                    break;
                }
            }
        } else {
            if (!(strength > 0.0)) out.push_back("profile strength must be positive");
            if (!(width > 0.0)) out.push_back("profile width must be positive");
        }
        return out;
    }

    bool valid() const { return invariant_violations().empty(); }

    // |g(ω)|²
    double density(double omega) const {
        switch (kind) {
        case ProfileKind::Lorentzian: {
            const double d = omega - center;
            return strength * strength * (width / pi) / (d * d + width * width);
        }
        case ProfileKind::Gaussian: {
            const double d = (omega - center) / width;
            return strength * strength * std::exp(-0.5 * d * d) /
                   (width * std::sqrt(2.0 * pi));
        }
        case ProfileKind::Tabulated: {
            if (nodes.empty() || omega < nodes.front() || omega > nodes.back()) return 0.0;
            const auto it = std::upper_bound(nodes.begin(), nodes.end(), omega);
            if (it == nodes.begin()) return values.front();
            const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
            if (hi >= nodes.size()) return values.back();
            const std::size_t lo = hi - 1;
            const double f = (omega - nodes[lo]) / (nodes[hi] - nodes[lo]);
            return values[lo] + f * (values[hi] - values[lo]);
        }
        }
        return 0.0;
    }

    // g(ω) = sqrt(|g(ω)|²); channel phases are applied at the channel level
    double amplitude(double omega) const { return std::sqrt(density(omega)); }

    // ∫₀^Ω |g(ω)|² dω in closed form (exact for the piecewise-linear kind)
    double mass_below(double omega_max) const {
        if (omega_max <= 0.0) return 0.0;
        switch (kind) {
        case ProfileKind::Lorentzian:
            return strength * strength / pi *
                   (std::atan((omega_max - center) / width) + std::atan(center / width));
        case ProfileKind::Gaussian: {
            const double r = 1.0 / (width * std::sqrt(2.0));
            return 0.5 * strength * strength *
                   (std::erf((omega_max - center) * r) + std::erf(center * r));
        }
        case ProfileKind::Tabulated: {
            double acc = 0.0;
            for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
                const double hi = std::min(omega_max, nodes[j + 1]);
                if (hi <= nodes[j]) break;
                const double f = (hi - nodes[j]) / (nodes[j + 1] - nodes[j]);
                const double v_hi = values[j] + f * (values[j + 1] - values[j]);
                acc += 0.5 * (values[j] + v_hi) * (hi - nodes[j]);
            }
            return acc;
        }
        }
        return 0.0;
    }

    // ∫₀^∞ |g(ω)|² dω
    double total_mass() const {
        switch (kind) {
        case ProfileKind::Lorentzian:
            return strength * strength * (0.5 + std::atan(center / width) / pi);
        case ProfileKind::Gaussian:
            return 0.5 * strength * strength *
                   (1.0 + std::erf(center / (width * std::sqrt(2.0))));
        case ProfileKind::Tabulated:
            return nodes.empty() ? 0.0 : mass_below(nodes.back());
        }
        return 0.0;
    }

    // Smallest Ω with tail mass ≤ tail_tol × total, found by bisection on the
    // closed-form cumulative mass. For fat-tailed (Lorentzian) profiles this
    // grows like κ/tail_tol and is a bookkeeping quantity, not a grid choice.
    double omega_max_for_tail(double tail_tol = 1e-10) const {
        if (kind == ProfileKind::Tabulated) return nodes.empty() ? 0.0 : nodes.back();
        const double total = total_mass();
        const double target = total * (1.0 - tail_tol);
        double lo = std::max(0.0, center);
        double hi = std::max(1.0, lo + width);
        while (mass_below(hi) < target) {
            hi *= 2.0;
            if (hi > 1e300) throw std::runtime_error("omega_max_for_tail: no finite cutoff");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mass_below(mid) < target ? lo : hi) = mid;
        }
        return hi;
    }

    // Frequency cutoff used when discretising the reservoir. For Gaussian
    // profiles the strict tail rule already lands at μ + ~7σ; the Lorentzian
    // tail rule would demand cutoffs ~κ/tol that no resolvable grid can
    // cover, so it is capped at μ + 40κ (≥ 99% of the spectral mass).
    double grid_cutoff(double tail_tol = 1e-10) const {
        switch (kind) {
        case ProfileKind::Lorentzian:
            return std::min(omega_max_for_tail(tail_tol),
                            std::max(center, 0.0) + 40.0 * width);
        case ProfileKind::Gaussian:
            return omega_max_for_tail(tail_tol);
        case ProfileKind::Tabulated:
            return nodes.empty() ? 0.0 : nodes.back();
        }
        return 0.0;
    }

    bool operator==(const SpectralProfile& o) const {
        if (kind != o.kind || support != o.support) return false;
        if (kind == ProfileKind::Tabulated) return nodes == o.nodes && values == o.values;
        return strength == o.strength && width == o.width && center == o.center;
    }
};

} // namespace friedsim
