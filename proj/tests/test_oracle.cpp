#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "friedsim/oracle.hpp"

using namespace friedsim;

namespace {

ModelSpec reference_single_level() {
    ModelSpec spec;
    spec.system = {1, {0.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back({1, 1, SpectralProfile::lorentzian(1.0, 5.0, 0.0)});
    return spec;
}

// single reservoir mode at ω with weight 1, so the coupling is exactly λ·c
ReservoirGrid single_mode_grid(double omega) {
    ReservoirGrid grid;
    grid.scheme = GridScheme::UniformTrapezoid;
    grid.omega_max = omega;
    grid.nodes = {omega};
    grid.weights = {1.0};
    return grid;
}

ModelSpec single_mode_model(double coupling, double omega) {
    ModelSpec spec;
    spec.system = {1, {0.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back(
        {1, 1,
         SpectralProfile::tabulated({0.0, 2.0 * omega},
                                    {coupling * coupling, coupling * coupling})});
    return spec;
}

// e^{-itH} for H = [[0, c], [c, ω]] via the Pauli decomposition
Matrix two_by_two_exponential(double c, double omega, double t) {
    const double alpha = 0.5 * omega;
    const double beta = std::sqrt(c * c + 0.25 * omega * omega);
    const double nx = c / beta;
    const double nz = -0.5 * omega / beta;
    Matrix n_sigma(2, 2);
    n_sigma << nz, nx, nx, -nz;
    const Complex phase = std::exp(Complex(0.0, -alpha * t));
    return phase * (std::cos(beta * t) * Matrix::Identity(2, 2) -
                    imag_unit * std::sin(beta * t) * n_sigma);
}

} // namespace

TEST_CASE("discretised hamiltonian assembles the documented 2x2 example") {
    const auto spec = single_mode_model(0.3, 2.0);
    const DiscretizedHamiltonian oracle(spec, single_mode_grid(2.0));
    REQUIRE(oracle.dim() == 2);
    const Matrix& h = oracle.matrix();
    CHECK(h(0, 0) == Complex{0.0, 0.0});
    CHECK(std::abs(h(0, 1) - Complex{0.3, 0.0}) < 1e-15);
    CHECK(std::abs(h(1, 0) - Complex{0.3, 0.0}) < 1e-15);
    CHECK(std::abs(h(1, 1) - Complex{2.0, 0.0}) < 1e-15);
    CHECK(hermiticity_defect(h) <= 1e-12);
}

TEST_CASE("uncoupled hamiltonian is block diagonal with the free spectrum") {
    auto spec = reference_single_level();
    spec.lambda = 0.0;
    const auto grid = make_grid(GridScheme::GaussLegendre, 8, 10.0);
    const DiscretizedHamiltonian oracle(spec, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(std::abs(oracle.matrix()(oracle.excitation_index(0, j), 0)) == 0.0);
    }
    // eigenvalues are {ε} ∪ {ε + ω_j}
    std::vector<double> expected{0.0};
    for (double w : grid.nodes) expected.push_back(w);
    std::sort(expected.begin(), expected.end());
    for (Eigen::Index k = 0; k < oracle.eigenvalues().size(); ++k) {
        CHECK(oracle.eigenvalues()(k) ==
              doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("friedrichs sparsity: no coupling inside the one-excitation sector") {
    ModelSpec spec;
    spec.system = {2, {0.0, 1.0}};
    spec.lambda = 1.3;
    spec.channels.channels.push_back({1, 2, SpectralProfile::lorentzian(1.0, 2.0, 0.0)});
    const auto grid = make_grid(GridScheme::GaussLegendre, 5, 8.0);
    const DiscretizedHamiltonian oracle(spec, grid);
    for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            for (std::size_t mp = 0; mp < 2; ++mp) {
                for (std::size_t jp = 0; jp < grid.size(); ++jp) {
                    const auto r = oracle.excitation_index(m, j);
                    const auto c = oracle.excitation_index(mp, jp);
                    if (r != c) CHECK(std::abs(oracle.matrix()(r, c)) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("oracle dimension gate") {
    const auto spec = reference_single_level();
    const auto grid = make_grid(GridScheme::UniformTrapezoid, 20001, 200.0);
    CHECK_THROWS_WITH_AS(DiscretizedHamiltonian(spec, grid), "oracle dimension gate exceeded",
                         std::invalid_argument);
}

TEST_CASE("exact amplitude basics") {
    const auto spec = reference_single_level();
    const auto grid = make_grid(GridScheme::GaussLegendre, 32, 30.0);
    const DiscretizedHamiltonian oracle(spec, grid);
    CHECK((oracle.exact_amplitude(0.0) - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff() <
          1e-14);

    auto free_spec = reference_single_level();
    free_spec.system.energies = {1.7};
    free_spec.lambda = 0.0;
    const DiscretizedHamiltonian free_oracle(free_spec, grid);
    const Complex expected = std::exp(Complex(0.0, -1.7 * 2.5));
    CHECK(std::abs(free_oracle.exact_amplitude(2.5)(0, 0) - expected) < 1e-13);
}

TEST_CASE("exact amplitude matches the closed 2x2 exponential") {
    const double c = 0.3, omega = 2.0;
    const auto spec = single_mode_model(c, omega);
    const DiscretizedHamiltonian oracle(spec, single_mode_grid(omega));
    for (const double t : {0.4, 1.0, pi / std::sqrt(0.09 + 1.0)}) {
        const Matrix direct = two_by_two_exponential(c, omega, t);
        CHECK(std::abs(oracle.exact_amplitude(t)(0, 0) - direct(0, 0)) < 1e-13);
    }
}

TEST_CASE("exact amplitude is a contraction of a unitary") {
    const auto spec = reference_single_level();
    const auto grid = make_grid(GridScheme::GaussLegendre, 64, 50.0);
    const DiscretizedHamiltonian oracle(spec, grid);
    for (const double t : {0.1, 0.5, 1.0, 3.0}) {
        CHECK(operator_norm(oracle.exact_amplitude(t)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("exact heisenberg initial data and free limits") {
    ModelSpec spec;
    spec.system = {2, {0.0, 1.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back({1, 2, SpectralProfile::lorentzian(1.0, 2.0, 0.0)});
    const auto grid = make_grid(GridScheme::GaussLegendre, 6, 8.0);
    const DiscretizedHamiltonian oracle(spec, grid);

    Matrix a(2, 2);
    a << 0.2, Complex(0.1, -0.3), Complex(0.1, 0.3), -0.7;

    SUBCASE("t = 0 restores a and a ⊗ 1") {
        const auto block = oracle.exact_heisenberg(a, 0.0);
        CHECK((block.a00 - a).cwiseAbs().maxCoeff() < 1e-13);
        REQUIRE(block.a11.rows() == 12);
        for (std::size_t m = 0; m < 2; ++m) {
            for (std::size_t mp = 0; mp < 2; ++mp) {
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const auto r = oracle.excitation_index(m, j) - 2;
                    const auto c = oracle.excitation_index(mp, j) - 2;
                    CHECK(std::abs(block.a11(r, c) -
                                   a(static_cast<Eigen::Index>(m),
                                     static_cast<Eigen::Index>(mp))) < 1e-13);
                }
            }
        }
    }
    SUBCASE("diagonal observables are constant at λ = 0") {
        auto free_spec = spec;
        free_spec.lambda = 0.0;
        const DiscretizedHamiltonian free_oracle(free_spec, grid);
        Matrix diag_obs(2, 2);
        diag_obs << 1.0, 0.0, 0.0, -1.0;
        const auto block = free_oracle.exact_heisenberg(diag_obs, 1.3);
        CHECK((block.a00 - diag_obs).cwiseAbs().maxCoeff() < 1e-13);
    }
    SUBCASE("hermiticity is preserved") {
        const auto block = oracle.exact_heisenberg(a, 0.8);
        CHECK(hermiticity_defect(block.a00) < 1e-12);
        CHECK(hermiticity_defect(block.a11) < 1e-12);
    }
}

TEST_CASE("grid refinement converges") {
    const auto spec = reference_single_level();
    const double t = 3.0;
    std::vector<Matrix> amps;
    for (const std::size_t n : {100u, 200u, 400u}) {
        const DiscretizedHamiltonian oracle(spec,
                                            make_grid(GridScheme::GaussLegendre, n, 200.0));
        amps.push_back(oracle.exact_amplitude(t));
    }
    const double gap_coarse = (amps[0] - amps[1]).cwiseAbs().maxCoeff();
    const double gap_fine = (amps[1] - amps[2]).cwiseAbs().maxCoeff();
    CHECK(gap_fine < gap_coarse);
}
