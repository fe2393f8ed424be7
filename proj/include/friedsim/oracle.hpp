// oracle.hpp — Exact diagonalisation of the discretised Hamiltonian on the
// vacuum ⊕ one-excitation subspace; ground truth for the time-domain solvers.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "friedsim/block_observable.hpp"
#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

// Basis layout: indices 0..n-1 are |e_i, vac⟩; index n + m·N + j is
// |e_{m+1}, 1_{ω_j}⟩. The one-excitation block is diagonal — the interaction
// couples the sectors only across the vacuum boundary.
class DiscretizedHamiltonian {
public:
    DiscretizedHamiltonian(const ModelSpec& spec, const ReservoirGrid& grid)
        : n_(spec.system.n), grid_(grid) {
        require_valid(spec);
        const std::size_t dim = n_ * (1 + grid.size());
        if (dim > 20000) throw std::invalid_argument("oracle dimension gate exceeded");

        Matrix h = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        h.topLeftCorner(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_)) =
            effective_system_hamiltonian(spec);

        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double omega = grid.nodes[j];
            const double root_w = std::sqrt(grid.weights[j]);
            const Matrix f = coupling_matrix(spec, omega);
            for (std::size_t m = 0; m < n_; ++m) {
                const Eigen::Index row = excitation_index(m, j);
                h(row, row) = spec.system.energies[m] + omega;
                for (std::size_t i = 0; i < n_; ++i) {
                    const Complex v = spec.lambda * root_w *
                                      f(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
                    h(row, static_cast<Eigen::Index>(i)) = v;
                    h(static_cast<Eigen::Index>(i), row) = std::conj(v);
                }
            }
        }
        hamiltonian_ = h;

        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("oracle: eigendecomposition failed");
        }
        eigenvalues_ = es.eigenvalues();
        eigenvectors_ = es.eigenvectors();
    }

    std::size_t levels() const { return n_; }
    std::size_t dim() const { return static_cast<std::size_t>(hamiltonian_.rows()); }
    const ReservoirGrid& grid() const { return grid_; }
    const Matrix& matrix() const { return hamiltonian_; }
    const RealVector& eigenvalues() const { return eigenvalues_; }

    Eigen::Index excitation_index(std::size_t m, std::size_t j) const {
        return static_cast<Eigen::Index>(n_ + m * grid_.size() + j);
    }

    // P₀ e^{-itH} P₀ on the system factor
    Matrix exact_amplitude(double t) const {
        if (t < 0.0) throw std::invalid_argument("exact_amplitude: t must be non-negative");
        const auto n = static_cast<Eigen::Index>(n_);
        const Matrix top = eigenvectors_.topRows(n); // n × d
        Vector phases(eigenvalues_.size());
        for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
            phases(k) = std::exp(Complex(0.0, -eigenvalues_(k) * t));
        }
        return top * phases.asDiagonal() * top.adjoint();
    }

    // Block compressions of e^{itH} (a ⊕ a⊗1_N) e^{-itH}
    BlockObservable exact_heisenberg(const Matrix& a, double t) const {
        if (t < 0.0) throw std::invalid_argument("exact_heisenberg: t must be non-negative");
        const auto n = static_cast<Eigen::Index>(n_);
        if (a.rows() != n || a.cols() != n) {
            throw std::invalid_argument("exact_heisenberg: observable dimension mismatch");
        }
        const auto d = static_cast<Eigen::Index>(dim());
        const auto big = d - n;

        Matrix a0 = Matrix::Zero(d, d);
        a0.topLeftCorner(n, n) = a;
        for (std::size_t m = 0; m < n_; ++m) {
            for (std::size_t mp = 0; mp < n_; ++mp) {
                const Complex v = a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(mp));
                if (v == Complex{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < grid_.size(); ++j) {
                    a0(excitation_index(m, j), excitation_index(mp, j)) = v;
                }
            }
        }

        Matrix m_eig = eigenvectors_.adjoint() * a0 * eigenvectors_;
        for (Eigen::Index k = 0; k < d; ++k) {
            for (Eigen::Index l = 0; l < d; ++l) {
                m_eig(k, l) *= std::exp(Complex(0.0, (eigenvalues_(k) - eigenvalues_(l)) * t));
            }
        }
        const Matrix at = eigenvectors_ * m_eig * eigenvectors_.adjoint();

        BlockObservable out;
        out.t = t;
        out.a00 = at.topLeftCorner(n, n);
        out.a11 = at.bottomRightCorner(big, big);
        return out;
    }

private:
    std::size_t n_;
    ReservoirGrid grid_;
    Matrix hamiltonian_;
    RealVector eigenvalues_;
    Matrix eigenvectors_;
};

} // namespace friedsim
