// pipeline.hpp — End-to-end reduced-dynamics run: resolve the kernel on its
// own quadrature grid, solve the Volterra equation, reconstruct the
// one-excitation amplitudes on the certification grid.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/propagator.hpp"

namespace friedsim {

struct SimulationResult {
    AmplitudeTrajectory traj;
    ExcitationTrajectory exc;
};

// Kernel quadrature must track the e^{-iωt} oscillations up to t_max, which
// generally needs more nodes than the certification grid carries; the grid's
// node count only sets a floor.
inline ReservoirGrid kernel_grid_for_run(const ReservoirGrid& cert_grid, double t_max,
                                         std::size_t n_min = 64) {
    const double by_rule = 10.0 * cert_grid.omega_max * t_max / (2.0 * pi);
    const std::size_t n = std::max({n_min, cert_grid.size(),
                                    static_cast<std::size_t>(std::ceil(by_rule))});
    return make_grid(GridScheme::GaussLegendre, n, cert_grid.omega_max);
}

inline SimulationResult simulate_reduced(const ModelSpec& spec, const ReservoirGrid& grid,
                                         double dt, std::size_t m_steps,
                                         std::vector<std::size_t> sample_indices = {}) {
    const ReservoirGrid kernel_grid =
        kernel_grid_for_run(grid, dt * static_cast<double>(m_steps));
    const KernelTable kernel =
        tabulate_kernel(spec, dt, m_steps, EvalMode::quadrature(kernel_grid));
    SimulationResult result;
    result.traj = solve_amplitude(spec, kernel, dt, m_steps);
    result.exc = reconstruct_excitation(spec, result.traj, grid, std::move(sample_indices));
    return result;
}

} // namespace friedsim
