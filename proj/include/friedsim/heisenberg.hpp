// heisenberg.hpp — Heisenberg-picture block dynamics on the discretised
// vacuum ⊕ one-excitation subspace, plus the Schrödinger/Heisenberg duality
// probe. The primary evolution propagates the full unitary blockwise with a
// Cayley (Crank–Nicolson) stepper — second order, time-reversible, exactly
// norm-preserving. The reduced block-diagonal pair (second-order form vs the
// literal four-block system) is kept as an internal consistency oracle.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "friedsim/block_observable.hpp"
#include "friedsim/dynmap.hpp"
#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/propagator.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

namespace detail {

// Discretised interaction blocks: V10 row (m·N + j) column i holds
// √w_j conj(f_{m,i}(ω_j)); the one-excitation free energies are ε_m + ω_j.
// The coupling constant λ is applied by the steppers, not stored here.
struct BlockSystem {
    std::size_t n = 0;
    std::size_t n_modes = 0; // grid size N
    Matrix h00;
    std::vector<double> exc_freq; // length n·N
    Matrix v10;                   // (n·N) × n

    std::size_t dim() const { return n * (1 + n_modes); }
    std::size_t exc_dim() const { return n * n_modes; }
};

inline BlockSystem make_block_system(const ModelSpec& spec, const ReservoirGrid& grid) {
    require_valid(spec);
    if (grid.size() == 0) throw std::invalid_argument("heisenberg: empty grid");
    BlockSystem sys;
    sys.n = spec.system.n;
    sys.n_modes = grid.size();
    sys.h00 = effective_system_hamiltonian(spec);
    sys.exc_freq.resize(sys.exc_dim());
    sys.v10 = Matrix::Zero(static_cast<Eigen::Index>(sys.exc_dim()),
                           static_cast<Eigen::Index>(sys.n));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double root_w = std::sqrt(grid.weights[j]);
        const Matrix f = coupling_matrix(spec, grid.nodes[j]);
        for (std::size_t m = 0; m < sys.n; ++m) {
            const std::size_t row = m * sys.n_modes + j;
            sys.exc_freq[row] = spec.system.energies[m] + grid.nodes[j];
            for (std::size_t i = 0; i < sys.n; ++i) {
                sys.v10(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) =
                    root_w * f(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
            }
        }
    }
    return sys;
}

// Cayley step for the full Hamiltonian H = [[h00, λV01], [λV10, diag(freq)]]:
// U ← (1 - iδH)⁻¹ (1 + iδH) U, solved through the Schur complement of the
// diagonal one-excitation block (cost O(d·n) per column).
class CayleyStepper {
public:
    // delta = -dt/2 makes the Cayley transform approximate e^{-iH dt}
    CayleyStepper(const BlockSystem& sys, double lambda, double dt)
        : sys_(&sys), lambda_(lambda), delta_(-0.5 * dt) {
        const auto n = static_cast<Eigen::Index>(sys.n);
        const Complex minus_i_delta{0.0, -delta_};

        inv_diag_.resize(static_cast<Eigen::Index>(sys.exc_dim()));
        for (std::size_t r = 0; r < sys.exc_dim(); ++r) {
            inv_diag_(static_cast<Eigen::Index>(r)) =
                1.0 / (1.0 + Complex(0.0, -delta_ * sys.exc_freq[r]));
        }
        v01_ = sys.v10.adjoint();
        const Matrix m01 = minus_i_delta * lambda_ * v01_;
        const Matrix m10 = minus_i_delta * lambda_ * sys.v10;
        const Matrix schur = Matrix::Identity(n, n) + minus_i_delta * sys.h00 -
                             m01 * inv_diag_.asDiagonal() * m10;
        schur_lu_.compute(schur);
        m01_ = m01;
        m10_ = m10;
    }

    // in-place Cayley step on a d × c block of columns
    void step(Matrix& top, Matrix& bottom) const {
        const Complex i_delta{0.0, delta_};
        // apply (1 + iδH)
        const Matrix new_top = top + i_delta * (sys_->h00 * top) +
                               i_delta * lambda_ * (v01_ * bottom);
        Matrix new_bottom = bottom + i_delta * lambda_ * (sys_->v10 * top);
        for (Eigen::Index r = 0; r < new_bottom.rows(); ++r) {
            new_bottom.row(r) +=
                i_delta * sys_->exc_freq[static_cast<std::size_t>(r)] * bottom.row(r);
        }
        // solve (1 - iδH) x = rhs
        const Matrix rhs_top =
            new_top - m01_ * (inv_diag_.asDiagonal() * new_bottom);
        top = schur_lu_.solve(rhs_top);
        bottom = inv_diag_.asDiagonal() * (new_bottom - m10_ * top);
    }

private:
    const BlockSystem* sys_;
    double lambda_;
    double delta_;
    Vector inv_diag_;
    Matrix v01_;
    Matrix m01_, m10_;
    Eigen::PartialPivLU<Matrix> schur_lu_;
};

// out = (a ⊗ 1_N) · in for the levels-outer excitation layout
inline Matrix kron_apply_left(const Matrix& a, std::size_t n_modes, const Matrix& in) {
    const auto n = a.rows();
    Matrix out = Matrix::Zero(in.rows(), in.cols());
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index mp = 0; mp < n; ++mp) {
            const Complex v = a(m, mp);
            if (v == Complex{0.0, 0.0}) continue;
            out.middleRows(m * static_cast<Eigen::Index>(n_modes),
                           static_cast<Eigen::Index>(n_modes)) +=
                v * in.middleRows(mp * static_cast<Eigen::Index>(n_modes),
                                  static_cast<Eigen::Index>(n_modes));
        }
    }
    return out;
}

} // namespace detail

// Snap requested times onto the integrator's step grid
inline std::vector<std::size_t> steps_for_times(const std::vector<double>& t_samples,
                                                double dt) {
    std::vector<std::size_t> steps;
    steps.reserve(t_samples.size());
    for (double t : t_samples) {
        if (t < 0.0) throw std::invalid_argument("sample times must be non-negative");
        const double k = std::round(t / dt);
        if (std::abs(t - k * dt) > 1e-9 * std::max(1.0, t)) {
            throw std::invalid_argument("sample times must be multiples of dt");
        }
        steps.push_back(static_cast<std::size_t>(k));
    }
    for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
        if (steps[s] >= steps[s + 1]) {
            throw std::invalid_argument("sample times must ascend");
        }
    }
    return steps;
}

// Evolves the block observable a(t) = e^{iHt} (a ⊕ a⊗1_N) e^{-iHt} and returns
// its P₀/P₁ compressions at the requested times. a11 tracking multiplies the
// propagated column count by N, so request it only on small grids.
inline std::vector<BlockObservable> evolve_observable(const ModelSpec& spec,
                                                      const ReservoirGrid& grid,
                                                      const Matrix& a,
                                                      const std::vector<double>& t_samples,
                                                      double dt, bool want_a11 = false) {
    require_valid(spec);
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_observable: dt must be positive");
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    if (a.rows() != n || a.cols() != n) {
        throw std::invalid_argument("evolve_observable: observable dimension mismatch");
    }

    const detail::BlockSystem sys = detail::make_block_system(spec, grid);
    const detail::CayleyStepper stepper(sys, spec.lambda, dt);
    const std::vector<std::size_t> steps = steps_for_times(t_samples, dt);
    const auto exc = static_cast<Eigen::Index>(sys.exc_dim());

    // columns of U(t): vacuum sector always, excitation sector on demand
    Matrix w0_top = Matrix::Identity(n, n);
    Matrix w0_bottom = Matrix::Zero(exc, n);
    Matrix w1_top, w1_bottom;
    if (want_a11) {
        w1_top = Matrix::Zero(n, exc);
        w1_bottom = Matrix::Identity(exc, exc);
    }

    std::vector<BlockObservable> out;
    out.reserve(steps.size());
    std::size_t next = 0;
    const std::size_t last = steps.empty() ? 0 : steps.back();

    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0) {
            stepper.step(w0_top, w0_bottom);
            if (want_a11) stepper.step(w1_top, w1_bottom);
        }
        while (next < steps.size() && steps[next] == k) {
            BlockObservable block;
            block.t = dt * static_cast<double>(k);
            // a00 = W₀† (a ⊕ a⊗1) W₀
            block.a00 = w0_top.adjoint() * (a * w0_top) +
                        w0_bottom.adjoint() *
                            detail::kron_apply_left(a, sys.n_modes, w0_bottom);
            // unitarity drift gate: the Cayley step is exactly unitary, so a
            // visible defect means the step could not be solved accurately
            const double drift = (w0_top.adjoint() * w0_top +
                                  w0_bottom.adjoint() * w0_bottom -
                                  Matrix::Identity(n, n))
                                     .cwiseAbs()
                                     .maxCoeff();
            if (drift > 1e-8) {
                throw std::runtime_error(
                    "evolve_observable: unitarity drift gate tripped (step too large "
                    "for the reservoir bandwidth)");
            }
            if (want_a11) {
                block.a11 = w1_top.adjoint() * (a * w1_top) +
                            w1_bottom.adjoint() *
                                detail::kron_apply_left(a, sys.n_modes, w1_bottom);
            }
            out.push_back(std::move(block));
            ++next;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reduced block-diagonal dynamics: the local-in-time second-order equation
//   d²𝐀/dt² = i[𝐇, d𝐀/dt] − λ²[𝐕,[𝐕,𝐀]],  𝐀 = diag(a00, a11),
// integrated by velocity-form leapfrog, and the equivalent literal four-block
// first-order system integrated by RK4. The two must agree to discretisation
// error; both serve as a consistency oracle, not as the production route
// (the reduced system drops the sector-mixing feedback of the full dynamics).
// ---------------------------------------------------------------------------

struct ReducedBlockResult {
    std::vector<double> times;
    std::vector<Matrix> a00_second_order; // leapfrog on the second-order form
    std::vector<Matrix> a00_first_order;  // RK4 on the four-block system
};

inline ReducedBlockResult evolve_reduced_blocks(const ModelSpec& spec,
                                                const ReservoirGrid& grid, const Matrix& a,
                                                const std::vector<double>& t_samples,
                                                double dt) {
    require_valid(spec);
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_reduced_blocks: dt must be positive");
    const detail::BlockSystem sys = detail::make_block_system(spec, grid);
    const auto n = static_cast<Eigen::Index>(sys.n);
    const auto exc = static_cast<Eigen::Index>(sys.exc_dim());
    const double lambda = spec.lambda;
    const double lam2 = lambda * lambda;
    const std::vector<std::size_t> steps = steps_for_times(t_samples, dt);
    const std::size_t last = steps.empty() ? 0 : steps.back();

    const Matrix v10 = sys.v10;
    const Matrix v01 = v10.adjoint();

    Eigen::SelfAdjointEigenSolver<Matrix> h00_es(sys.h00);
    const Matrix q0 = h00_es.eigenvectors();
    const RealVector h0 = h00_es.eigenvalues();

    // elementwise resolvent/apply of (1 ∓ i(dt/2) ad_H) per diagonal block
    auto ad_solve = [&](Matrix& x00, Matrix& x11) {
        Matrix y = q0.adjoint() * x00 * q0;
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index s = 0; s < n; ++s) {
                y(r, s) /= 1.0 - Complex(0.0, 0.5 * dt * (h0(r) - h0(s)));
            }
        }
        x00 = q0 * y * q0.adjoint();
        for (Eigen::Index r = 0; r < exc; ++r) {
            for (Eigen::Index s = 0; s < exc; ++s) {
                x11(r, s) /= 1.0 - Complex(0.0, 0.5 * dt *
                                                    (sys.exc_freq[static_cast<std::size_t>(r)] -
                                                     sys.exc_freq[static_cast<std::size_t>(s)]));
            }
        }
    };
    auto ad_apply_half = [&](const Matrix& x00, const Matrix& x11, Matrix& y00, Matrix& y11) {
        y00 = x00 + Complex(0.0, 0.5 * dt) * (sys.h00 * x00 - x00 * sys.h00);
        y11 = x11;
        for (Eigen::Index r = 0; r < exc; ++r) {
            for (Eigen::Index s = 0; s < exc; ++s) {
                y11(r, s) *= 1.0 + Complex(0.0, 0.5 * dt *
                                                    (sys.exc_freq[static_cast<std::size_t>(r)] -
                                                     sys.exc_freq[static_cast<std::size_t>(s)]));
            }
        }
    };
    // −λ²[𝐕,[𝐕,·]] on the diagonal blocks
    auto double_commutator = [&](const Matrix& x00, const Matrix& x11, Matrix& f00,
                                 Matrix& f11) {
        const Matrix o01 = v01 * x11 - x00 * v01;
        const Matrix o10 = v10 * x00 - x11 * v10;
        f00 = -lam2 * (v01 * o10 - o01 * v10);
        f11 = -lam2 * (v10 * o01 - o10 * v01);
    };

    ReducedBlockResult out;
    for (std::size_t s : steps) out.times.push_back(dt * static_cast<double>(s));

    // --- route 1: velocity leapfrog on the second-order form ---
    {
        Matrix x00 = a;
        Matrix x11 = Matrix::Zero(exc, exc);
        Matrix v00 = imag_unit * (sys.h00 * a - a * sys.h00);
        Matrix v11 = Matrix::Zero(exc, exc);

        // half-kick to stagger the velocity
        {
            Matrix f00, f11;
            double_commutator(x00, x11, f00, f11);
            Matrix acc00 = imag_unit * (sys.h00 * v00 - v00 * sys.h00) + f00;
            Matrix acc11 = f11;
            for (Eigen::Index r = 0; r < exc; ++r) {
                for (Eigen::Index c = 0; c < exc; ++c) {
                    acc11(r, c) += Complex(0.0, sys.exc_freq[static_cast<std::size_t>(r)] -
                                                    sys.exc_freq[static_cast<std::size_t>(c)]) *
                                   v11(r, c);
                }
            }
            v00 += 0.5 * dt * acc00;
            v11 += 0.5 * dt * acc11;
        }

        std::size_t next = 0;
        for (std::size_t k = 0; k <= last; ++k) {
            while (next < steps.size() && steps[next] == k) {
                out.a00_second_order.push_back(x00);
                ++next;
            }
            if (k == last) break;
            // drift with the staggered velocity, then implicit-midpoint kick
            x00 += dt * v00;
            x11 += dt * v11;
            Matrix f00, f11;
            double_commutator(x00, x11, f00, f11);
            Matrix r00, r11;
            ad_apply_half(v00, v11, r00, r11);
            r00 += dt * f00;
            r11 += dt * f11;
            ad_solve(r00, r11);
            v00 = r00;
            v11 = r11;
        }
    }

    // --- route 2: RK4 on the literal four-block system ---
    {
        struct State {
            Matrix x00, x01, x10, x11;
        };
        auto axpy = [](const State& x, double c, const State& d) {
            return State{x.x00 + c * d.x00, x.x01 + c * d.x01, x.x10 + c * d.x10,
                         x.x11 + c * d.x11};
        };
        auto deriv = [&](const State& x) {
            State d;
            d.x00 = imag_unit * (sys.h00 * x.x00 - x.x00 * sys.h00) +
                    imag_unit * lambda * (v01 * x.x10 - x.x01 * v10);
            d.x01 = imag_unit * lambda * (v01 * x.x11 - x.x00 * v01);
            d.x10 = imag_unit * lambda * (v10 * x.x00 - x.x11 * v10);
            d.x11 = imag_unit * lambda * (v10 * x.x01 - x.x10 * v01);
            for (Eigen::Index r = 0; r < exc; ++r) {
                for (Eigen::Index c = 0; c < exc; ++c) {
                    d.x11(r, c) += Complex(0.0, sys.exc_freq[static_cast<std::size_t>(r)] -
                                                    sys.exc_freq[static_cast<std::size_t>(c)]) *
                                   x.x11(r, c);
                }
            }
            return d;
        };

        State x{a, Matrix::Zero(n, exc), Matrix::Zero(exc, n), Matrix::Zero(exc, exc)};
        std::size_t next = 0;
        for (std::size_t k = 0; k <= last; ++k) {
            while (next < steps.size() && steps[next] == k) {
                out.a00_first_order.push_back(x.x00);
                ++next;
            }
            if (k == last) break;
            const State k1 = deriv(x);
            const State k2 = deriv(axpy(x, 0.5 * dt, k1));
            const State k3 = deriv(axpy(x, 0.5 * dt, k2));
            const State k4 = deriv(axpy(x, dt, k3));
            x.x00 += (dt / 6.0) * (k1.x00 + 2.0 * k2.x00 + 2.0 * k3.x00 + k4.x00);
            x.x01 += (dt / 6.0) * (k1.x01 + 2.0 * k2.x01 + 2.0 * k3.x01 + k4.x01);
            x.x10 += (dt / 6.0) * (k1.x10 + 2.0 * k2.x10 + 2.0 * k3.x10 + k4.x10);
            x.x11 += (dt / 6.0) * (k1.x11 + 2.0 * k2.x11 + 2.0 * k3.x11 + k4.x11);
        }
    }
    return out;
}

// |Tr(T_t(a) ρ₀) − Tr(a T_{*t}(ρ₀))|: the Heisenberg route reads T_t(a) off
// a00(t); the Schrödinger route applies the Kraus map to ρ₀. Both pipelines
// share the grid and the step so that only integrator error survives.
inline double duality_defect(const ModelSpec& spec, const ReservoirGrid& grid,
                             const Matrix& a, const Matrix& rho0, double t, double dt) {
    require_valid(spec);
    require_density_matrix(rho0);
    if (!(t >= 0.0)) throw std::invalid_argument("duality_defect: t must be non-negative");

    const auto heis = evolve_observable(spec, grid, a, {t}, dt, false);
    const double value_h = (heis.front().a00 * rho0).trace().real();

    const auto m_steps = static_cast<std::size_t>(std::round(t / dt));
    if (m_steps == 0) {
        return std::abs(value_h - (a * rho0).trace().real());
    }
    const KernelTable kernel =
        tabulate_kernel(spec, dt, m_steps, EvalMode::quadrature(grid));
    const AmplitudeTrajectory traj = solve_amplitude(spec, kernel, dt, m_steps);
    const ExcitationTrajectory exc = reconstruct_excitation(spec, traj, grid, {m_steps});
    const Matrix rho_t = evolve_density(rho0, kraus_snapshot(traj, exc, 0));
    const double value_s = (a * rho_t).trace().real();
    return std::abs(value_h - value_s);
}

} // namespace friedsim
