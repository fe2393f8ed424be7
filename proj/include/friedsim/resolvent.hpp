// resolvent.hpp — Laplace-domain analysis: G(p), second-sheet resonance
// poles, and Bromwich inversion as an independent route to A(t).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "friedsim/model.hpp"
#include "friedsim/quadrature.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

enum class Sheet { Physical, SecondSheet };

struct ResolventMatrix {
    Complex p;
    Matrix value;
    Sheet sheet = Sheet::Physical;
};

// Typical frequency magnitude of the problem, used to scale contour defaults
inline double spectral_scale(const ModelSpec& spec) {
    double scale = 1.0;
    for (double e : spec.system.energies) scale = std::max(scale, std::abs(e));
    for (const auto& c : spec.channels.channels) {
        if (c.profile.kind != ProfileKind::Tabulated) {
            scale = std::max(scale, c.profile.width + std::abs(c.profile.center));
            scale = std::max(scale, std::abs(spec.lambda) * c.profile.strength);
        } else if (!c.profile.nodes.empty()) {
            scale = std::max(scale, c.profile.nodes.back());
        }
    }
    return scale;
}

namespace detail {

inline bool rational_pair(const SpectralProfile& a, const SpectralProfile& b) {
    return a.kind == ProfileKind::Lorentzian && b.kind == ProfileKind::Lorentzian &&
           a.width == b.width && a.center == b.center;
}

// Unit-strength Lorentzian density continued to complex argument
inline Complex lorentzian_density(const SpectralProfile& prof, Complex z) {
    const Complex d = z - prof.center;
    return (prof.width / pi) / (d * d + prof.width * prof.width);
}

// J(q) = ∫ √(ρ_A ρ_B)(ω) / (q + iω) dω for a rational (same-shape Lorentzian)
// pair. Physical sheet: extended-support integral, with the residue jump for
// Re q < 0. Second sheet: the rational continuation from Re q > 0.
inline Complex rational_pair_integral(const SpectralProfile& a, const SpectralProfile& b,
                                      Complex q, Sheet sheet) {
    const double gg = a.strength * b.strength;
    const Complex r = gg / (q + a.width + Complex(0.0, a.center));
    if (sheet == Sheet::SecondSheet || q.real() >= 0.0) return r;
    return r - 2.0 * pi * gg * lorentzian_density(a, imag_unit * q);
}

// Merged graded panels on [0, cutoff] focused on the profile peak and, when
// present, on the resonance point where |q + iω| is smallest.
inline std::vector<double> pair_quadrature_edges(const SpectralProfile& a,
                                                 const SpectralProfile& b, Complex q,
                                                 double cutoff) {
    const double width = std::min(a.kind == ProfileKind::Tabulated ? cutoff : a.width,
                                  b.kind == ProfileKind::Tabulated ? cutoff : b.width);
    const double fine = std::max(1e-8 * cutoff, std::min(width / 4.0, cutoff / 16.0));
    const double coarse = cutoff / 8.0;
    const double focus = a.kind == ProfileKind::Tabulated ? 0.0 : a.center;
    std::vector<double> edges = graded_panel_edges(0.0, cutoff, focus, fine, coarse);

    const double omega_res = -q.imag();
    if (omega_res > 0.0 && omega_res < cutoff && std::abs(q.real()) < coarse) {
        const double res_fine =
            std::max(1e-8 * cutoff, std::min(fine, std::abs(q.real()) / 2.0));
        std::vector<double> more =
            graded_panel_edges(0.0, cutoff, omega_res, res_fine, coarse);
        edges.insert(edges.end(), more.begin(), more.end());
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    return edges;
}

// ∫ f_A conj(f_B) / (q + iω) dω for one channel pair, phases excluded
inline Complex pair_integral(const SpectralProfile& a, const SpectralProfile& b, Complex q,
                             Sheet sheet, const ReservoirGrid* grid) {
    if (sheet == Sheet::SecondSheet) {
        if (!rational_pair(a, b)) {
            throw std::invalid_argument(
                "resolvent: second sheet requires Lorentzian profiles with a shared shape");
        }
        return rational_pair_integral(a, b, q, Sheet::SecondSheet);
    }

    const bool extended = a.support == Support::Extended || b.support == Support::Extended;
    if (extended && rational_pair(a, b)) {
        return rational_pair_integral(a, b, q, Sheet::Physical);
    }

    if (grid) {
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < grid->size(); ++j) {
            const double w = grid->nodes[j];
            const double f = a.amplitude(w) * b.amplitude(w);
            if (f != 0.0) acc += grid->weights[j] * f / (q + Complex(0.0, w));
        }
        return acc;
    }

    auto integrand = [&](double w) -> Complex {
        return a.amplitude(w) * b.amplitude(w) / (q + Complex(0.0, w));
    };
    if (extended) {
        // Gaussian tails die fast enough for a symmetric window
        if (a.kind != ProfileKind::Gaussian || !(a == b)) {
            throw std::invalid_argument(
                "resolvent: extended-support quadrature implemented for matching "
                "Gaussian profiles only");
        }
        const double lo = a.center - 9.0 * a.width;
        const double hi = a.center + 9.0 * a.width;
        return integrate_panels(integrand,
                                graded_panel_edges(lo, hi, a.center, a.width / 4.0,
                                                   2.0 * a.width));
    }
    const double cutoff = std::max(a.grid_cutoff(), b.grid_cutoff());
    return integrate_panels(integrand, pair_quadrature_edges(a, b, q, cutoff));
}

// d/dq of pair_integral, second sheet (rational) only
inline Complex pair_integral_derivative(const SpectralProfile& a, const SpectralProfile& b,
                                        Complex q) {
    const Complex den = q + a.width + Complex(0.0, a.center);
    return -a.strength * b.strength / (den * den);
}

} // namespace detail

// ⟨e_k, G(p) e_ℓ⟩ = δ_{kℓ}(p + iε_k) + λ² Σ_m ∫ f_{m,k} conj(f_{m,ℓ}) /
// (p + iε_m + iω) dω. Pass a grid to evaluate the integral on that
// discretisation (consistent with the discretised Hamiltonian).
inline ResolventMatrix eval_G(const ModelSpec& spec, Complex p, Sheet sheet,
                              const ReservoirGrid* grid = nullptr) {
    require_valid(spec);
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    const double lam2 = spec.lambda * spec.lambda;

    Matrix g = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        g(k, k) = p + Complex(0.0, spec.system.energies[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
            Complex acc{0.0, 0.0};
            for (Eigen::Index m = 0; m < n; ++m) {
                const Channel* ck = spec.channels.find(m + 1, k + 1);
                const Channel* cl = spec.channels.find(m + 1, l + 1);
                if (!ck || !cl) continue;
                const Complex q =
                    p + Complex(0.0, spec.system.energies[static_cast<std::size_t>(m)]);
                const Complex phase = std::polar(1.0, ck->phase - cl->phase);
                acc += phase * detail::pair_integral(ck->profile, cl->profile, q, sheet, grid);
            }
            g(k, l) += lam2 * acc;
        }
    }
    return ResolventMatrix{p, g, sheet};
}

namespace detail {

// Second-sheet G and dG/dp for the Newton iteration
inline void second_sheet_pair(const ModelSpec& spec, Complex p, Matrix& g, Matrix& dg) {
    const auto n = static_cast<Eigen::Index>(spec.system.n);
    const double lam2 = spec.lambda * spec.lambda;
    g = Matrix::Zero(n, n);
    dg = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        g(k, k) = p + Complex(0.0, spec.system.energies[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
            for (Eigen::Index m = 0; m < n; ++m) {
                const Channel* ck = spec.channels.find(m + 1, k + 1);
                const Channel* cl = spec.channels.find(m + 1, l + 1);
                if (!ck || !cl) continue;
                if (!rational_pair(ck->profile, cl->profile)) {
                    throw std::invalid_argument(
                        "find_poles: second sheet requires Lorentzian channels of a "
                        "shared shape");
                }
                const Complex q =
                    p + Complex(0.0, spec.system.energies[static_cast<std::size_t>(m)]);
                const Complex phase = std::polar(1.0, ck->phase - cl->phase);
                g(k, l) += lam2 * phase *
                           rational_pair_integral(ck->profile, cl->profile, q,
                                                  Sheet::SecondSheet);
                dg(k, l) += lam2 * phase *
                            pair_integral_derivative(ck->profile, cl->profile, q);
            }
        }
    }
}

} // namespace detail

struct ResonancePole {
    Complex location;
    Matrix residue;        // residue of G(p)⁻¹ at the pole
    double det_residual = 0.0;
    int newton_iterations = 0;
};

struct PoleSearchBox {
    double re_min = -10.0;
    double re_max = 0.0;
    double im_min = -10.0;
    double im_max = 10.0;
};

// Newton iteration on det G(p) = 0 from a uniform seed grid; converged roots
// are deduplicated and kept when strictly inside the open left half-plane.
// Residues of G⁻¹ come from a small-circle contour integral.
inline std::vector<ResonancePole> find_poles(const ModelSpec& spec, const PoleSearchBox& box,
                                             std::size_t seeds_per_dim = 5) {
    require_valid(spec);
    if (box.re_min > box.re_max || box.im_min > box.im_max) {
        throw std::invalid_argument("find_poles: empty search box");
    }
    if (box.re_max > 0.0) {
        throw std::invalid_argument("find_poles: search box must lie in the left half-plane");
    }
    if (seeds_per_dim < 1) throw std::invalid_argument("find_poles: need at least one seed");

    Matrix g, dg;
    std::vector<Complex> roots;
    std::vector<int> iters;

    const double box_span = std::hypot(box.re_max - box.re_min, box.im_max - box.im_min);
    const double max_step = 0.25 * std::max(box_span, 1e-6);
    const double roam = 2.0 * box_span + 1.0;

    for (std::size_t a = 0; a < seeds_per_dim; ++a) {
        for (std::size_t b = 0; b < seeds_per_dim; ++b) {
            const double fa = (a + 0.5) / static_cast<double>(seeds_per_dim);
            const double fb = (b + 0.5) / static_cast<double>(seeds_per_dim);
            const Complex seed(box.re_min + fa * (box.re_max - box.re_min),
                               box.im_min + fb * (box.im_max - box.im_min));
            Complex p = seed;

            bool converged = false;
            int it = 0;
            for (; it < 100; ++it) {
                detail::second_sheet_pair(spec, p, g, dg);
                const Eigen::PartialPivLU<Matrix> lu(g);
                // Newton on det G deflated by the roots already in hand:
                // Δp = -1 / (tr(G⁻¹ G') - Σ_k 1/(p - p_k))
                Complex log_deriv = (lu.solve(dg)).trace();
                for (const auto& r : roots) log_deriv -= 1.0 / (p - r);
                if (!std::isfinite(log_deriv.real()) || !std::isfinite(log_deriv.imag()) ||
                    log_deriv == Complex{0.0, 0.0}) {
                    break;
                }
                Complex dp = -1.0 / log_deriv;
                if (std::abs(dp) > max_step) dp *= max_step / std::abs(dp);
                p += dp;
                if (std::abs(dp) <= 1e-13 * (1.0 + std::abs(p))) {
                    converged = true;
                    break;
                }
                if (std::abs(p - seed) > roam) break;
            }
            if (!converged) continue;
            if (p.real() >= -1e-12 * (1.0 + std::abs(p))) continue; // spectrum on the axis
            const double margin = 1e-6 * (1.0 + std::abs(p));
            if (p.real() < box.re_min - margin || p.real() > box.re_max + margin ||
                p.imag() < box.im_min - margin || p.imag() > box.im_max + margin) {
                continue;
            }
            bool duplicate = false;
            for (const auto& r : roots) {
                if (std::abs(r - p) <= 1e-8 * (1.0 + std::abs(r))) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) {
                roots.push_back(p);
                iters.push_back(it + 1);
            }
        }
    }

    std::vector<ResonancePole> poles;
    for (std::size_t r = 0; r < roots.size(); ++r) {
        const Complex p_star = roots[r];
        detail::second_sheet_pair(spec, p_star, g, dg);
        const Complex det = g.determinant();
        const Complex det_prime = det * (Eigen::PartialPivLU<Matrix>(g).solve(dg)).trace();
        const double local_scale =
            std::max(1.0, std::abs(det_prime) * (1.0 + std::abs(p_star)));
        if (std::abs(det) > 1e-10 * local_scale) continue;

        // circle radius: clear of the other roots
        double radius = 1e-2 * (1.0 + std::abs(p_star));
        for (std::size_t s = 0; s < roots.size(); ++s) {
            if (s != r) radius = std::min(radius, 0.45 * std::abs(roots[s] - p_star));
        }
        radius = std::max(radius, 1e-8);

        const std::size_t n_points = 64;
        Matrix residue =
            Matrix::Zero(static_cast<Eigen::Index>(spec.system.n),
                         static_cast<Eigen::Index>(spec.system.n));
        for (std::size_t q = 0; q < n_points; ++q) {
            const double theta = 2.0 * pi * static_cast<double>(q) / n_points;
            const Complex z = p_star + radius * std::exp(Complex(0.0, theta));
            detail::second_sheet_pair(spec, z, g, dg);
            // (1/2πi) ∮ G⁻¹ dp with dp = i r e^{iθ} dθ
            residue += g.inverse() *
                       (radius * std::exp(Complex(0.0, theta)) /
                        static_cast<double>(n_points));
        }

        ResonancePole pole;
        pole.location = p_star;
        pole.residue = residue;
        pole.det_residual = std::abs(det);
        pole.newton_iterations = iters[r];
        poles.push_back(pole);
    }

    std::sort(poles.begin(), poles.end(), [](const ResonancePole& a, const ResonancePole& b) {
        if (a.location.real() != b.location.real()) {
            return a.location.real() > b.location.real();
        }
        return a.location.imag() < b.location.imag();
    });
    return poles;
}

struct BromwichParams {
    double sigma = 0.1;       // contour abscissa, right of all singularities
    double half_height = 0.0; // 0 → 200 × spectral scale
    double step = 0.0;        // 0 → min(π/(10 t_max), 0.05)
    double tail_gate = 1e-6;  // max allowed magnitude of the truncated tail terms
};

struct LaplaceInversion {
    std::vector<double> times;
    std::vector<Matrix> samples;
};

// A(t) = (1/2πi) ∫ e^{pt} G(p)⁻¹ dp on a truncated vertical contour. The free
// resolvent (p + iH_eff)⁻¹ is inverted analytically and subtracted, so the
// numerical integrand decays like |p|⁻² and the trapezoid tail is tame.
inline LaplaceInversion invert_laplace(const ModelSpec& spec,
                                       const std::vector<double>& t_samples,
                                       BromwichParams params = {},
                                       const ReservoirGrid* grid = nullptr) {
    require_valid(spec);
    if (t_samples.empty()) throw std::invalid_argument("invert_laplace: no sample times");
    for (double t : t_samples) {
        if (t < 0.0) throw std::invalid_argument("invert_laplace: t must be non-negative");
    }
    if (!(params.sigma > 0.0)) {
        throw std::invalid_argument("invert_laplace: contour abscissa must be positive");
    }

    const double t_max = *std::max_element(t_samples.begin(), t_samples.end());
    const double scale = spectral_scale(spec);
    const double half_height =
        params.half_height > 0.0 ? params.half_height : 200.0 * scale;
    const double step =
        params.step > 0.0 ? params.step
                          : std::min(t_max > 0.0 ? pi / (10.0 * t_max) : 0.05, 0.05);

    const auto n = static_cast<Eigen::Index>(spec.system.n);
    const Matrix h_eff = effective_system_hamiltonian(spec);
    const auto n_nodes = static_cast<std::size_t>(std::ceil(2.0 * half_height / step)) + 1;

    std::vector<Complex> ys(n_nodes);
    std::vector<Matrix> diff(n_nodes);
    double tail_mag = 0.0;
    for (std::size_t r = 0; r < n_nodes; ++r) {
        const double y = -half_height + step * static_cast<double>(r);
        const Complex p(params.sigma, y);
        const Matrix g = eval_G(spec, p, Sheet::Physical, grid).value;
        const Matrix free_res =
            (p * Matrix::Identity(n, n) + imag_unit * h_eff).inverse();
        diff[r] = g.inverse() - free_res;
        ys[r] = p;
        if (r < 3 || r + 3 >= n_nodes) {
            tail_mag = std::max(tail_mag, diff[r].cwiseAbs().maxCoeff());
        }
    }
    // |diff| ~ C/y² at the ends, so the discarded tails integrate to about
    // 2C/Y = 2·tail_mag·Y; scaled by e^{σt}/2π like the kept part.
    const double tail_term =
        tail_mag * half_height / pi * std::exp(params.sigma * t_max);
    if (tail_term > params.tail_gate) {
        throw std::runtime_error(
            "invert_laplace: contour truncation too coarse (tail-term gate tripped); "
            "increase half_height");
    }

    LaplaceInversion out;
    out.times = t_samples;
    out.samples.reserve(t_samples.size());
    for (double t : t_samples) {
        Matrix acc = Matrix::Zero(n, n);
        for (std::size_t r = 0; r < n_nodes; ++r) {
            const double w = (r == 0 || r + 1 == n_nodes) ? 0.5 : 1.0;
            acc += w * std::exp(ys[r] * t) * diff[r];
        }
        acc *= step / (2.0 * pi); // dp = i dy and the 1/(2πi) prefactor cancel to 1/2π
        acc += hermitian_propagator(h_eff, t);
        out.samples.push_back(acc);
    }
    return out;
}

} // namespace friedsim
