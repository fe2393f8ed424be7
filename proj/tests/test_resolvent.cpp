#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "friedsim/kernel.hpp"
#include "friedsim/propagator.hpp"
#include "friedsim/resolvent.hpp"

using namespace friedsim;

namespace {

ModelSpec reference_single_level(Support support = Support::Extended) {
    ModelSpec spec;
    spec.system = {1, {0.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back({1, 1, SpectralProfile::lorentzian(1.0, 5.0, 0.0, support)});
    return spec;
}

} // namespace

TEST_CASE("G reduces to the free resolvent at λ = 0") {
    ModelSpec spec;
    spec.system = {2, {0.5, 2.0}};
    spec.lambda = 0.0;
    spec.channels.channels.push_back({1, 2, SpectralProfile::lorentzian(1.0, 1.0, 0.0)});
    const Complex p(0.3, -1.2);
    const Matrix g = eval_G(spec, p, Sheet::Physical).value;
    CHECK(std::abs(g(0, 0) - (p + Complex(0.0, 0.5))) < 1e-14);
    CHECK(std::abs(g(1, 1) - (p + Complex(0.0, 2.0))) < 1e-14);
    CHECK(std::abs(g(0, 1)) == 0.0);
}

TEST_CASE("extended lorentzian G has the rational closed form") {
    const auto spec = reference_single_level();
    for (const Complex p : {Complex(1.0, 0.0), Complex(0.2, 3.0), Complex(2.0, -1.0)}) {
        const Matrix g = eval_G(spec, p, Sheet::Physical).value;
        const Complex expected = p + 1.0 / (p + 5.0);
        CHECK(std::abs(g(0, 0) - expected) < 1e-12);
    }
}

TEST_CASE("physical-sheet quadrature agrees with the closed form at p = 1") {
    // quadrature over the extended support: symmetric panels wide enough for
    // the 1/ω² tail of the smooth (non-oscillatory) integrand
    const auto prof = SpectralProfile::lorentzian(1.0, 5.0, 0.0, Support::Extended);
    const Complex p(1.0, 0.0);
    std::vector<double> edges = graded_panel_edges(-2000.0, 2000.0, 0.0, 1.0, 200.0);
    const Complex brute = integrate_panels(
        [&](double w) { return Complex(prof.density(w), 0.0) / (p + Complex(0.0, w)); }, edges);
    const Complex closed = 1.0 / (p + 5.0);
    CHECK(std::abs(brute - closed) < 1e-6);

    const auto spec = reference_single_level();
    CHECK(std::abs(eval_G(spec, p, Sheet::Physical).value(0, 0) - (p + closed)) < 1e-12);
}

TEST_CASE("grid-mode G matches the discretised resolvent term by term") {
    const auto spec = reference_single_level(Support::Physical);
    const auto grid = make_grid(GridScheme::GaussLegendre, 50, 200.0);
    const Complex p(0.7, 0.4);
    const Matrix g = eval_G(spec, p, Sheet::Physical, &grid).value;
    Complex expected = p;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        expected += grid.weights[j] * spec.channels.channels[0].profile.density(grid.nodes[j]) /
                    (p + Complex(0.0, grid.nodes[j]));
    }
    CHECK(std::abs(g(0, 0) - expected) < 1e-13);
}

TEST_CASE("physical sheet carries the branch jump below the axis") {
    // J(q) for the μ=0 Lorentzian at real q < 0:
    // R(q) − 2πρ(iq) = 1/(q+κ) − 2κ/(κ²−q²), checked against -1/6 at q=-1, κ=5
    const auto spec = reference_single_level();
    const Matrix g = eval_G(spec, Complex(-1.0, 0.0), Sheet::Physical).value;
    CHECK(std::abs((g(0, 0) - Complex(-1.0, 0.0)) - Complex(-1.0 / 6.0, 0.0)) < 1e-12);

    // the second sheet is the plain rational continuation
    const Matrix g2 = eval_G(spec, Complex(-1.0, 0.0), Sheet::SecondSheet).value;
    CHECK(std::abs((g2(0, 0) - Complex(-1.0, 0.0)) - Complex(0.25, 0.0)) < 1e-14);
}

TEST_CASE("schwarz-type reflection: G(conj p)† = -G(-p)") {
    ModelSpec spec;
    spec.system = {2, {0.4, 1.3}};
    spec.lambda = 0.8;
    spec.channels.channels.push_back({1, 1, SpectralProfile::lorentzian(0.7, 2.0, 1.0)});
    spec.channels.channels.push_back({1, 2, SpectralProfile::lorentzian(0.5, 2.0, 1.0), });
    const auto grid = make_grid(GridScheme::GaussLegendre, 300, 90.0);

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> re(0.2, 2.0), im(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Complex p(re(rng), im(rng));
        const Matrix left = eval_G(spec, std::conj(p), Sheet::Physical, &grid).value.adjoint();
        const Matrix right = -eval_G(spec, -p, Sheet::Physical, &grid).value;
        CHECK((left - right).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("second sheet needs a rationally continuable profile") {
    ModelSpec spec;
    spec.system = {1, {0.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back({1, 1, SpectralProfile::gaussian(1.0, 1.0, 3.0)});
    CHECK_THROWS_AS(eval_G(spec, Complex(-0.5, 0.0), Sheet::SecondSheet), std::invalid_argument);
}

TEST_CASE("pole search finds the quadratic roots of the reference model") {
    const auto spec = reference_single_level();
    const auto poles = find_poles(spec, {-6.0, 0.0, -3.0, 3.0});
    REQUIRE(poles.size() == 2);
    const double root_fast = 0.5 * (-5.0 - std::sqrt(21.0));
    const double root_slow = 0.5 * (-5.0 + std::sqrt(21.0));
    CHECK(poles[0].location.real() == doctest::Approx(root_slow).epsilon(1e-10));
    CHECK(std::abs(poles[0].location.imag()) < 1e-10);
    CHECK(poles[1].location.real() == doctest::Approx(root_fast).epsilon(1e-10));
    CHECK(poles[0].det_residual < 1e-10);

    // residues of G⁻¹ = (p+κ)/((p-p₊)(p-p₋)) sum to the initial condition
    const Complex residue_sum = poles[0].residue(0, 0) + poles[1].residue(0, 0);
    CHECK(std::abs(residue_sum - Complex(1.0, 0.0)) < 1e-8);
    const Complex expected_slow = (root_slow + 5.0) / (root_slow - root_fast);
    CHECK(std::abs(poles[0].residue(0, 0) - expected_slow) < 1e-8);
}

TEST_CASE("no spurious poles at λ = 0") {
    auto spec = reference_single_level();
    spec.lambda = 0.0;
    const auto poles = find_poles(spec, {-6.0, 0.0, -3.0, 3.0});
    CHECK(poles.empty());
}

TEST_CASE("pole reality pairing for real symmetric data") {
    // underdamped case: complex-conjugate pair
    ModelSpec spec;
    spec.system = {1, {0.0}};
    spec.lambda = 1.0;
    spec.channels.channels.push_back(
        {1, 1, SpectralProfile::lorentzian(2.0, 1.0, 0.0, Support::Extended)});
    const auto poles = find_poles(spec, {-2.0, 0.0, -4.0, 4.0});
    REQUIRE(poles.size() == 2);
    CHECK(poles[0].location.real() == doctest::Approx(poles[1].location.real()).epsilon(1e-10));
    CHECK(poles[0].location.imag() == doctest::Approx(-poles[1].location.imag()).epsilon(1e-10));
}

TEST_CASE("search box validation") {
    const auto spec = reference_single_level();
    CHECK_THROWS_AS(find_poles(spec, {-1.0, 0.5, -1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(find_poles(spec, {1.0, -1.0, -1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("bromwich inversion recovers free evolution exactly") {
    ModelSpec spec;
    spec.system = {1, {2.0}};
    spec.lambda = 0.0;
    const std::vector<double> times{0.1, 0.5, 1.0, 3.0, 5.0};
    const auto inv = invert_laplace(spec, times);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const Complex expected = std::exp(Complex(0.0, -2.0 * times[s]));
        CHECK(std::abs(inv.samples[s](0, 0) - expected) < 1e-6);
    }
}

TEST_CASE("bromwich inversion approaches the identity at t → 0⁺") {
    const auto spec = reference_single_level();
    const auto inv = invert_laplace(spec, {1e-3});
    CHECK(std::abs(inv.samples[0](0, 0) - Complex(1.0, 0.0)) < 1e-3);
}

TEST_CASE("bromwich inversion matches the volterra route on the reference model") {
    const auto spec = reference_single_level();
    const double dt = 1e-3;
    const std::size_t m = 5000;
    const auto traj =
        solve_amplitude(spec, tabulate_kernel(spec, dt, m, EvalMode::closed_form()), dt, m);

    std::vector<double> times;
    for (int k = 1; k <= 50; ++k) times.push_back(0.1 * k);
    const auto inv = invert_laplace(spec, times);
    double worst = 0.0;
    for (std::size_t s = 0; s < times.size(); ++s) {
        const auto idx = static_cast<std::size_t>(std::round(times[s] / dt));
        worst = std::max(worst,
                         std::abs(inv.samples[s](0, 0) - traj.at(idx)(0, 0)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("the truncation gate rejects a hopeless contour") {
    const auto spec = reference_single_level();
    BromwichParams params;
    params.half_height = 3.0; // far too short for a κ = 5 feature
    CHECK_THROWS_AS(invert_laplace(spec, {1.0}, params), std::runtime_error);
}

TEST_CASE("no second-sheet zeros leak into the right half-plane scan") {
    const auto spec = reference_single_level();
    // det G on the physical sheet, sampled on a right-half-plane grid, never
    // dips to zero: the spectrum of iH is purely imaginary
    for (double re = 0.2; re <= 3.0; re += 0.7) {
        for (double im = -4.0; im <= 4.0; im += 1.0) {
            const Matrix g = eval_G(spec, Complex(re, im), Sheet::Physical).value;
            CHECK(std::abs(g.determinant()) > 1e-3);
        }
    }
}
