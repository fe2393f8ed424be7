// types.hpp — Shared aliases and small numeric helpers

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace friedsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex imag_unit{0.0, 1.0};

// Largest deviation from Hermitian symmetry, max |M - M†| entrywise
inline double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

// Spectral (operator) norm
inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// exp(-i t H) for Hermitian H via eigendecomposition
inline Matrix hermitian_propagator(const Matrix& h, double t) {
    if (!is_hermitian(h, 1e-10)) {
        throw std::invalid_argument("hermitian_propagator: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) {
        phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Fixed-width scientific formatting, 17 significant digits, lowercase
inline std::string format_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

} // namespace friedsim
