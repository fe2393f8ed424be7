// dynmap.hpp — Kraus form of the reduced dynamical map, Choi-matrix
// certification of complete positivity and trace preservation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "friedsim/propagator.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

// ρ(t) = A ρ A† + Σ_j W_j ρ W_j† with W_j = √w_j B_j(t)
struct KrausSnapshot {
    double t = 0.0;
    Matrix amplitude;                  // A(t)
    std::vector<Matrix> weighted_ops;  // √w_j B_j(t)
};

inline KrausSnapshot kraus_snapshot(const AmplitudeTrajectory& traj,
                                    const ExcitationTrajectory& exc, std::size_t sample) {
    if (sample >= exc.samples()) {
        throw std::invalid_argument("kraus_snapshot: sample index out of range");
    }
    KrausSnapshot snap;
    snap.t = exc.time(sample);
    snap.amplitude = traj.samples.at(exc.sample_indices[sample]);
    snap.weighted_ops.reserve(exc.grid.size());
    for (std::size_t j = 0; j < exc.grid.size(); ++j) {
        snap.weighted_ops.push_back(std::sqrt(exc.grid.weights[j]) * exc.node_samples[sample][j]);
    }
    return snap;
}

namespace detail {

// Kraus sum applied to an arbitrary operator (no density-matrix checks)
inline Matrix apply_map(const KrausSnapshot& snap, const Matrix& x) {
    Matrix out = snap.amplitude * x * snap.amplitude.adjoint();
    for (const auto& w : snap.weighted_ops) {
        out += w * x * w.adjoint();
    }
    return out;
}

} // namespace detail

inline void require_density_matrix(const Matrix& rho, double tol = 1e-10) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    if (hermiticity_defect(rho) > tol) {
        throw std::invalid_argument("density matrix not Hermitian");
    }
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol) {
        throw std::invalid_argument("density matrix trace differs from one");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) {
        throw std::invalid_argument("density matrix not positive semidefinite");
    }
}

inline Matrix evolve_density(const Matrix& rho0, const KrausSnapshot& snap) {
    require_density_matrix(rho0);
    if (rho0.rows() != snap.amplitude.rows()) {
        throw std::invalid_argument("evolve_density: dimension mismatch");
    }
    return detail::apply_map(snap, rho0);
}

struct ChoiMatrix {
    Matrix matrix;      // n² × n², Hermitian
    double min_eigenvalue = 0.0;
    double trace = 0.0;
};

// Choi = Σ_{kl} |e_k⟩⟨e_l| ⊗ Map(|e_k⟩⟨e_l|); block (k, l) holds the image of
// the matrix unit E_kl. Positive semidefinite iff the map is CP.
inline ChoiMatrix choi(const KrausSnapshot& snap) {
    const Eigen::Index n = snap.amplitude.rows();
    Matrix c = Matrix::Zero(n * n, n * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
            Matrix unit = Matrix::Zero(n, n);
            unit(k, l) = 1.0;
            c.block(k * n, l * n, n, n) = detail::apply_map(snap, unit);
        }
    }
    ChoiMatrix out;
    out.matrix = 0.5 * (c + c.adjoint()); // symmetrise away rounding
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.trace = out.matrix.trace().real();
    return out;
}

// Pure probe states |v⟩⟨v| spanning the operator space: basis kets plus the
// (e_k+e_l)/√2 and (e_k+ie_l)/√2 superpositions — n² states in total.
inline std::vector<Matrix> probe_states(std::size_t n_levels) {
    const auto n = static_cast<Eigen::Index>(n_levels);
    std::vector<Matrix> states;
    auto push = [&](const Vector& v) { states.push_back(v * v.adjoint()); };
    for (Eigen::Index k = 0; k < n; ++k) {
        Vector v = Vector::Zero(n);
        v(k) = 1.0;
        push(v);
    }
    const double r = 1.0 / std::sqrt(2.0);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = k + 1; l < n; ++l) {
            Vector v = Vector::Zero(n);
            v(k) = r;
            v(l) = r;
            push(v);
            v(l) = Complex(0.0, r);
            push(v);
        }
    }
    return states;
}

struct CertificationRecord {
    double t = 0.0;
    double choi_min_eigenvalue = 0.0;
    double trace_defect = 0.0;
    double norm_defect = 0.0;
};

struct CertificationReport {
    std::vector<CertificationRecord> records;
    double cp_gate = -1e-8; // min Choi eigenvalue must stay above this
    double tp_gate = 1e-4;  // trace defect must stay below this
    bool passed = false;

    double worst_choi_eigenvalue() const {
        double worst = 0.0;
        for (const auto& r : records) worst = std::min(worst, r.choi_min_eigenvalue);
        return worst;
    }
    double worst_trace_defect() const {
        double worst = 0.0;
        for (const auto& r : records) worst = std::max(worst, r.trace_defect);
        return worst;
    }
};

inline CertificationReport certify(const AmplitudeTrajectory& traj,
                                   const ExcitationTrajectory& exc,
                                   double cp_gate = -1e-8, double tp_gate = 1e-4) {
    if (!(tp_gate > 0.0)) throw std::invalid_argument("certify: tolerances must be positive");
    CertificationReport report;
    report.cp_gate = cp_gate;
    report.tp_gate = tp_gate;

    const std::vector<double> defects = norm_defect(traj, exc);
    const std::vector<Matrix> probes =
        probe_states(static_cast<std::size_t>(traj.samples.front().rows()));

    bool pass = true;
    for (std::size_t s = 0; s < exc.samples(); ++s) {
        const KrausSnapshot snap = kraus_snapshot(traj, exc, s);
        CertificationRecord rec;
        rec.t = snap.t;
        rec.choi_min_eigenvalue = choi(snap).min_eigenvalue;
        rec.norm_defect = defects[s];
        for (const auto& rho : probes) {
            const Complex tr = detail::apply_map(snap, rho).trace();
            rec.trace_defect = std::max(rec.trace_defect, std::abs(tr - Complex{1.0, 0.0}));
        }
        pass = pass && rec.choi_min_eigenvalue >= cp_gate && rec.trace_defect <= tp_gate;
        report.records.push_back(rec);
    }
    report.passed = pass;
    return report;
}

} // namespace friedsim
