// propagator.hpp — Volterra integro-differential solver for the survival
// amplitude A(t) and variation-of-constants reconstruction of the
// one-excitation amplitudes B_j(t).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

struct AmplitudeTrajectory {
    double dt = 0.0;
    std::vector<Matrix> samples; // A(j·dt), A(0) = I

    std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
    double time(std::size_t j) const { return dt * static_cast<double>(j); }
    const Matrix& at(std::size_t j) const { return samples.at(j); }
};

// Largest singular value over all samples; A(t) compresses a unitary, so
// this should not exceed 1 + O(solver error).
inline double max_singular_value(const AmplitudeTrajectory& traj) {
    double top = 0.0;
    for (const auto& a : traj.samples) top = std::max(top, operator_norm(a));
    return top;
}

// Solves dA/dt = -i H_eff A - λ² ∫₀ᵗ K(t-s) A(s) ds, A(0) = 1, by trapezoidal
// product integration with an Euler predictor / trapezoid corrector step.
// Second order in dt; cost O(n³ M²) from the growing convolution sums.
inline AmplitudeTrajectory solve_amplitude(const ModelSpec& spec, const KernelTable& kernel,
                                           double dt, std::size_t m_steps) {
    require_valid(spec);
    if (m_steps < 1) throw std::invalid_argument("solve_amplitude: need at least one step");
    if (!(dt > 0.0)) throw std::invalid_argument("solve_amplitude: dt must be positive");
    if (std::abs(kernel.dt - dt) > 1e-12 * std::max(1.0, dt)) {
        throw std::invalid_argument("solve_amplitude: kernel table sampled at a different dt");
    }
    if (kernel.samples.size() < m_steps + 1) {
        throw std::invalid_argument("solve_amplitude: kernel table too short for requested steps");
    }

    const auto n = static_cast<Eigen::Index>(spec.system.n);
    const Matrix h_eff = effective_system_hamiltonian(spec);
    const double lam2 = spec.lambda * spec.lambda;
    const bool convolve = lam2 != 0.0 && !spec.channels.empty();
    const Complex minus_i{0.0, -1.0};

    AmplitudeTrajectory traj;
    traj.dt = dt;
    traj.samples.reserve(m_steps + 1);
    traj.samples.push_back(Matrix::Identity(n, n));

    // trapezoid convolution split into the fixed history part and the moving
    // endpoint, so corrector sweeps only pay for the endpoint term
    auto interior_sum = [&](std::size_t k) -> Matrix {
        Matrix acc = Matrix::Zero(n, n);
        if (!convolve || k == 0) return acc;
        acc = 0.5 * (kernel.samples[k] * traj.samples[0]);
        for (std::size_t j = 1; j < k; ++j) {
            acc += kernel.samples[k - j] * traj.samples[j];
        }
        return acc;
    };

    for (std::size_t k = 0; k < m_steps; ++k) {
        const Matrix& a_k = traj.samples[k];
        Matrix f_k = minus_i * (h_eff * a_k);
        if (convolve && k > 0) {
            f_k -= lam2 * dt * (interior_sum(k) + 0.5 * (kernel.samples[0] * a_k));
        }

        const Matrix interior_next = interior_sum(k + 1);
        auto rhs_next = [&](const Matrix& endpoint) -> Matrix {
            Matrix f = minus_i * (h_eff * endpoint);
            if (convolve) {
                f -= lam2 * dt * (interior_next + 0.5 * (kernel.samples[0] * endpoint));
            }
            return f;
        };

        Matrix next = a_k + dt * f_k; // Euler predictor
        for (int sweep = 0; sweep < 2; ++sweep) {
            next = a_k + 0.5 * dt * (f_k + rhs_next(next));
        }
        traj.samples.push_back(std::move(next));
    }
    return traj;
}

// One-excitation amplitudes per grid node. The stored B_j(t) are unweighted;
// the physical amplitude of |e_m, 1_{ω_j}⟩ is √w_j (B_j(t) φ)_m.
struct ExcitationTrajectory {
    ReservoirGrid grid;
    double dt = 0.0;
    std::vector<std::size_t> sample_indices;            // ascending indices into A(t)
    std::vector<std::vector<Matrix>> node_samples;      // [sample][node], n×n each

    std::size_t samples() const { return sample_indices.size(); }
    double time(std::size_t s) const { return dt * static_cast<double>(sample_indices.at(s)); }
};

// B_j(t) = -iλ ∫₀ᵗ e^{-i(D+ω_j)(t-s)} F(ω_j) A(s) ds by the trapezoid rule on
// the trajectory's own time grid. Pass sample_indices to keep only selected
// times; the running integral still walks every step.
inline ExcitationTrajectory reconstruct_excitation(
    const ModelSpec& spec, const AmplitudeTrajectory& traj, const ReservoirGrid& grid,
    std::vector<std::size_t> sample_indices = {}) {
    require_valid(spec);
    if (traj.samples.empty()) throw std::invalid_argument("reconstruct_excitation: empty trajectory");
    if (grid.size() == 0) throw std::invalid_argument("reconstruct_excitation: empty grid");

    if (sample_indices.empty()) {
        sample_indices.resize(traj.samples.size());
        std::iota(sample_indices.begin(), sample_indices.end(), 0);
    }
    for (std::size_t s = 0; s + 1 < sample_indices.size(); ++s) {
        if (sample_indices[s] >= sample_indices[s + 1]) {
            throw std::invalid_argument("reconstruct_excitation: sample indices must ascend");
        }
    }
    if (sample_indices.back() >= traj.samples.size()) {
        throw std::invalid_argument("reconstruct_excitation: sample index beyond trajectory");
    }

    const auto n = static_cast<Eigen::Index>(spec.system.n);
    const double dt = traj.dt;
    const std::size_t last = sample_indices.back();

    ExcitationTrajectory exc;
    exc.grid = grid;
    exc.dt = dt;
    exc.sample_indices = sample_indices;
    exc.node_samples.assign(sample_indices.size(), std::vector<Matrix>(grid.size()));

    const Complex minus_i_lambda{0.0, -spec.lambda};

    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double omega = grid.nodes[j];
        const Matrix f = coupling_matrix(spec, omega);

        // mode frequencies ε_m + ω_j
        std::vector<double> freq(spec.system.n);
        for (std::size_t m = 0; m < spec.system.n; ++m) {
            freq[m] = spec.system.energies[m] + omega;
        }
        auto phase_diag = [&](double t, double sign) {
            Vector d(n);
            for (Eigen::Index m = 0; m < n; ++m) {
                d(m) = std::exp(Complex(0.0, sign * freq[static_cast<std::size_t>(m)] * t));
            }
            return d;
        };

        Matrix running = Matrix::Zero(n, n);   // trapezoid of e^{+iΛs} F A(s)
        Matrix g_prev = f * traj.samples[0];   // s = 0 term
        std::size_t out = 0;
        for (std::size_t k = 0; k <= last; ++k) {
            if (k > 0) {
                const double t_k = dt * static_cast<double>(k);
                const Matrix g_k = phase_diag(t_k, +1.0).asDiagonal() * (f * traj.samples[k]);
                running += 0.5 * dt * (g_prev + g_k);
                g_prev = g_k;
            }
            if (out < sample_indices.size() && sample_indices[out] == k) {
                const double t_k = dt * static_cast<double>(k);
                exc.node_samples[out][j] =
                    minus_i_lambda * (phase_diag(t_k, -1.0).asDiagonal() * running);
                ++out;
            }
        }
    }
    return exc;
}

// ‖A†A + Σ_j w_j B_j†B_j − 1‖ at each stored excitation sample
inline std::vector<double> norm_defect(const AmplitudeTrajectory& traj,
                                       const ExcitationTrajectory& exc) {
    if (std::abs(traj.dt - exc.dt) > 1e-12 * std::max(1.0, traj.dt)) {
        throw std::invalid_argument("norm_defect: trajectory/excitation step mismatch");
    }
    const Eigen::Index n = traj.samples.front().rows();
    std::vector<double> out;
    out.reserve(exc.samples());
    for (std::size_t s = 0; s < exc.samples(); ++s) {
        const Matrix& a = traj.samples.at(exc.sample_indices[s]);
        Matrix e = a.adjoint() * a - Matrix::Identity(n, n);
        for (std::size_t j = 0; j < exc.grid.size(); ++j) {
            const Matrix& b = exc.node_samples[s][j];
            e += exc.grid.weights[j] * (b.adjoint() * b);
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
        out.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return out;
}

} // namespace friedsim
