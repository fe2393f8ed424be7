// kernel.hpp — Reservoir correlation functions and the memory kernel K(t)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "friedsim/model.hpp"
#include "friedsim/profile.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

// How frequency integrals are evaluated: analytically (extended-support
// parametric profiles only) or by quadrature on a reservoir grid.
struct EvalMode {
    enum class Kind { ClosedForm, Quadrature } kind = Kind::ClosedForm;
    std::optional<ReservoirGrid> grid;

    static EvalMode closed_form() { return {Kind::ClosedForm, std::nullopt}; }
    static EvalMode quadrature(ReservoirGrid g) { return {Kind::Quadrature, std::move(g)}; }

    bool is_closed_form() const { return kind == Kind::ClosedForm; }
};

namespace detail {

inline bool closed_form_pair(const SpectralProfile& a, const SpectralProfile& b) {
    return a == b && a.support == Support::Extended &&
           (a.kind == ProfileKind::Lorentzian || a.kind == ProfileKind::Gaussian);
}

inline Complex closed_form_correlation(const SpectralProfile& p, double t) {
    const double g2 = p.strength * p.strength;
    const Complex rotation = std::exp(Complex(0.0, -p.center * t));
    if (p.kind == ProfileKind::Lorentzian) {
        return g2 * std::exp(-p.width * std::abs(t)) * rotation;
    }
    return g2 * std::exp(-0.5 * p.width * p.width * t * t) * rotation;
}

} // namespace detail

// c(t) = ∫ g_A(ω) conj(g_B(ω)) e^{-iωt} dω. Quadrature integrates over the
// grid's [0, ω_max]; the closed form is the extended-support result,
// available for identical Lorentzian/Gaussian profiles.
inline Complex correlation(const SpectralProfile& a, const SpectralProfile& b, double t,
                           const EvalMode& mode) {
    if (t < 0.0) throw std::invalid_argument("correlation: t must be non-negative");
    if (!a.valid() || !b.valid()) throw std::invalid_argument("correlation: invalid profile");

    if (mode.is_closed_form()) {
        if (!detail::closed_form_pair(a, b)) {
            throw std::invalid_argument(
                "correlation: no closed form for this profile pair "
                "(needs identical extended-support Lorentzian or Gaussian profiles)");
        }
        return detail::closed_form_correlation(a, t);
    }

    if (!mode.grid) throw std::invalid_argument("correlation: quadrature mode needs a grid");
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < mode.grid->size(); ++j) {
        const double w = mode.grid->nodes[j];
        const double f = a.amplitude(w) * b.amplitude(w);
        if (f != 0.0) acc += mode.grid->weights[j] * f * std::exp(Complex(0.0, -w * t));
    }
    return acc;
}

// K_{kℓ}(t) = Σ_m e^{-iε_m t} ∫ f_{m,k}(ω) conj(f_{m,ℓ}(ω)) e^{-iωt} dω, with
// f = e^{iφ}√|g|². The λ² prefactor is left to the solver.
inline Matrix memory_kernel(const ModelSpec& spec, double t, const EvalMode& mode) {
    require_valid(spec);
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    Matrix kern = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
            Complex acc{0.0, 0.0};
            for (Eigen::Index m = 0; m < n; ++m) {
                const Channel* ck = spec.channels.find(m + 1, k + 1);
                const Channel* cl = spec.channels.find(m + 1, l + 1);
                if (!ck || !cl) continue;
                const Complex phase =
                    std::polar(1.0, ck->phase) * std::polar(1.0, -cl->phase);
                const double eps_m = spec.system.energies[static_cast<std::size_t>(m)];
                acc += std::exp(Complex(0.0, -eps_m * t)) * phase *
                       correlation(ck->profile, cl->profile, t, mode);
            }
            kern(k, l) = acc;
        }
    }
    return kern;
}

struct KernelTable {
    double dt = 0.0;
    std::vector<Matrix> samples; // K(j·dt), j = 0..M

    std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
    const Matrix& at(std::size_t j) const { return samples.at(j); }
};

inline KernelTable tabulate_kernel(const ModelSpec& spec, double dt, std::size_t m,
                                   const EvalMode& mode) {
    if (!(dt > 0.0)) throw std::invalid_argument("tabulate_kernel: dt must be positive");
    if (m < 1) throw std::invalid_argument("tabulate_kernel: need at least two samples");
    KernelTable table;
    table.dt = dt;
    table.samples.reserve(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        table.samples.push_back(memory_kernel(spec, dt * static_cast<double>(j), mode));
    }
    return table;
}

// Grid sized for quadrature of e^{-iωt} integrands: ≥ 10 nodes per
// oscillation period at the largest time of interest.
inline ReservoirGrid kernel_rule_grid(const ModelSpec& spec, double t_max,
                                      std::size_t n_min = 64) {
    const double omega_max = default_omega_max(spec);
    const double by_rule = 10.0 * omega_max * t_max / (2.0 * pi);
    const std::size_t n = std::max<std::size_t>(n_min, static_cast<std::size_t>(std::ceil(by_rule)));
    return make_grid(GridScheme::GaussLegendre, n, omega_max);
}

inline void write_kernel_csv(const KernelTable& table, std::size_t n, std::ostream& os) {
    os << "t";
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t l = 1; l <= n; ++l) {
            os << ",ReK_" << k << "_" << l << ",ImK_" << k << "_" << l;
        }
    }
    os << "\n";
    for (std::size_t j = 0; j < table.samples.size(); ++j) {
        os << format_sci(table.dt * static_cast<double>(j));
        const Matrix& kern = table.samples[j];
        for (Eigen::Index k = 0; k < kern.rows(); ++k) {
            for (Eigen::Index l = 0; l < kern.cols(); ++l) {
                os << "," << format_sci(kern(k, l).real()) << "," << format_sci(kern(k, l).imag());
            }
        }
        os << "\n";
    }
}

} // namespace friedsim
