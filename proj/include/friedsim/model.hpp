// model.hpp — Problem definition: levels, channels, coupling, reservoir grid

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "friedsim/profile.hpp"
#include "friedsim/quadrature.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

struct LevelSystem {
    std::size_t n = 1;
    std::vector<double> energies; // ε_i, angular frequency units (ħ = 1)
};

// One reservoir channel: the form factor attached to the transition pair
// (i, j), 1-based to match the usual level-index convention.
struct Channel {
    std::size_t i = 1;
    std::size_t j = 1;
    SpectralProfile profile;
    double phase = 0.0; // radians; channel function is e^{iφ} √|g(ω)|²
};

struct ChannelMatrix {
    std::vector<Channel> channels;

    const Channel* find(std::size_t i, std::size_t j) const {
        for (const auto& c : channels) {
            if (c.i == i && c.j == j) return &c;
        }
        return nullptr;
    }

    bool empty() const { return channels.empty(); }
};

enum class GridScheme { UniformTrapezoid, GaussLegendre };

// Discretisation of the reservoir continuum on [0, ω_max]
struct ReservoirGrid {
    GridScheme scheme = GridScheme::GaussLegendre;
    double omega_max = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline ReservoirGrid make_grid(GridScheme scheme, std::size_t n, double omega_max) {
    if (n < 2) throw std::invalid_argument("make_grid: need at least two nodes");
    if (!(omega_max > 0.0)) throw std::invalid_argument("make_grid: omega_max must be positive");

    const QuadratureRule rule = (scheme == GridScheme::GaussLegendre)
                                    ? gauss_legendre(n, 0.0, omega_max)
                                    : uniform_trapezoid(n, 0.0, omega_max);
    ReservoirGrid grid;
    grid.scheme = scheme;
    grid.omega_max = omega_max;
    grid.nodes = rule.nodes;
    grid.weights = rule.weights;
    return grid;
}

struct ModelSpec {
    LevelSystem system;
    ChannelMatrix channels;
    double lambda = 1.0;
    std::optional<Matrix> shift; // P₀VP₀ block; zero for the vacuum model
    std::optional<ReservoirGrid> grid;

    std::size_t n() const { return system.n; }
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }

    std::string summary() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v;
        }
        return s;
    }
};

inline ValidationReport validate(const ModelSpec& spec) {
    ValidationReport report;
    auto flag = [&](const std::string& msg) { report.violations.push_back(msg); };

    if (spec.system.n < 1) flag("system must have at least one level");
    if (spec.system.energies.size() != spec.system.n) {
        flag("energy list length does not match level count");
    } else {
        for (std::size_t a = 0; a < spec.system.n; ++a) {
            for (std::size_t b = a + 1; b < spec.system.n; ++b) {
                if (spec.system.energies[a] == spec.system.energies[b]) {
                    flag("degenerate spectrum: levels " + std::to_string(a + 1) + " and " +
                         std::to_string(b + 1) + " share energy");
                }
            }
        }
    }

    for (const auto& c : spec.channels.channels) {
        if (c.i < 1 || c.i > spec.system.n || c.j < 1 || c.j > spec.system.n) {
            flag("channel (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                 ") references a level outside 1.." + std::to_string(spec.system.n));
        }
        for (const auto& v : c.profile.invariant_violations()) {
            flag("channel (" + std::to_string(c.i) + "," + std::to_string(c.j) + "): " + v);
        }
    }

    if (spec.shift) {
        const Matrix& s = *spec.shift;
        if (s.rows() != static_cast<Eigen::Index>(spec.system.n) ||
            s.cols() != static_cast<Eigen::Index>(spec.system.n)) {
            flag("shift dimension does not match level count");
        } else if (hermiticity_defect(s) > 1e-12) {
            flag("shift not Hermitian");
        }
    }

    if (!std::isfinite(spec.lambda)) flag("coupling constant must be finite");
    return report;
}

inline void require_valid(const ModelSpec& spec) {
    const ValidationReport report = validate(spec);
    if (!report.ok()) {
        throw std::invalid_argument("invalid model: " + report.summary());
    }
}

// diag(ε) + λ·S, the P₀-compressed Hamiltonian driving the local term
inline Matrix effective_system_hamiltonian(const ModelSpec& spec) {
    require_valid(spec);
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        h(k, k) = spec.system.energies[static_cast<std::size_t>(k)];
    }
    if (spec.shift) h += spec.lambda * (*spec.shift);
    return h;
}

// Channel function f_{m,i}(ω) = e^{iφ} √|g(ω)|², zero when the pair is uncoupled
inline Complex channel_value(const ModelSpec& spec, std::size_t m, std::size_t i,
                             double omega) {
    const Channel* c = spec.channels.find(m, i);
    if (!c) return Complex{0.0, 0.0};
    return std::polar(c->profile.amplitude(omega), c->phase);
}

// The n×n matrix F(ω) with F_{m,i} = conj(f_{m,i}(ω)); rows are the
// one-excitation target level, columns the vacuum-sector source level.
// The discretised coupling block into mode (m, ω_j) is λ √w_j F(ω_j).
inline Matrix coupling_matrix(const ModelSpec& spec, double omega) {
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    Matrix f = Matrix::Zero(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index i = 0; i < n; ++i) {
            f(m, i) = std::conj(channel_value(spec, static_cast<std::size_t>(m) + 1,
                                              static_cast<std::size_t>(i) + 1, omega));
        }
    }
    return f;
}

// Default reservoir cutoff: the largest per-channel grid cutoff
inline double default_omega_max(const ModelSpec& spec) {
    double cutoff = 0.0;
    for (const auto& c : spec.channels.channels) {
        cutoff = std::max(cutoff, c.profile.grid_cutoff());
    }
    return cutoff > 0.0 ? cutoff : 1.0;
}

inline ReservoirGrid default_grid(const ModelSpec& spec, std::size_t n_nodes = 400) {
    if (spec.grid) return *spec.grid;
    return make_grid(GridScheme::GaussLegendre, n_nodes, default_omega_max(spec));
}

} // namespace friedsim
