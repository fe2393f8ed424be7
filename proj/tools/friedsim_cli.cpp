// friedsim_cli.cpp — batch front end: loads a model file, runs a scenario,
// writes plot-ready data files and certification reports.
//
// Exit codes: 0 success, 1 numerical gate failure, 2 usage/parse error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "friedsim/friedsim.hpp"
#include "friedsim/pipeline.hpp"

namespace fs = std::filesystem;
using namespace friedsim;

namespace {

struct CommonOptions {
    std::string model_path;
    std::string preset;
    double dt = 1e-3;
    std::size_t steps = 5000;
    std::size_t grid_n = 0;    // 0 → model file / default
    double omega_max = 0.0;    // 0 → model file / tail rule
    std::string output_dir = ".";
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--model", opt.model_path, "model file (JSON)");
    cmd->add_option("--preset", opt.preset,
                    "stock model: reference-single-level or two-level-decay");
    cmd->add_option("--dt", opt.dt, "time step")->check(CLI::PositiveNumber);
    cmd->add_option("--steps", opt.steps, "number of time steps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid-n", opt.grid_n, "reservoir grid nodes");
    cmd->add_option("--omega-max", opt.omega_max, "reservoir frequency cutoff");
    cmd->add_option("--output-dir", opt.output_dir, "directory for output files");
    cmd->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

ModelSpec resolve_model(const CommonOptions& opt) {
    if (opt.model_path.empty() == opt.preset.empty()) {
        throw ParseError("exactly one of --model or --preset is required");
    }
    ModelSpec spec = opt.preset.empty()
                         ? load_model_file(opt.model_path)
                         : model_from_json(nlohmann::json::parse(preset_model(opt.preset)));
    const ValidationReport report = validate(spec);
    if (!report.ok()) throw ParseError("invalid model: " + report.summary());
    return spec;
}

ReservoirGrid resolve_grid(const ModelSpec& spec, const CommonOptions& opt) {
    if (opt.grid_n == 0 && opt.omega_max == 0.0 && spec.grid) return *spec.grid;
    const std::size_t n = opt.grid_n > 0 ? opt.grid_n : (spec.grid ? spec.grid->size() : 400);
    const double omega_max =
        opt.omega_max > 0.0 ? opt.omega_max
                            : (spec.grid ? spec.grid->omega_max : default_omega_max(spec));
    return make_grid(GridScheme::GaussLegendre, n, omega_max);
}

fs::path output_file(const CommonOptions& opt, const std::string& name) {
    fs::create_directories(opt.output_dir);
    return fs::path(opt.output_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::vector<std::size_t> thinned_samples(std::size_t steps, std::size_t target) {
    const std::size_t stride = std::max<std::size_t>(1, steps / target);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k <= steps; k += stride) idx.push_back(k);
    if (idx.back() != steps) idx.push_back(steps);
    return idx;
}

std::pair<std::size_t, std::size_t> parse_pattern_indices(const std::string& pattern,
                                                          std::size_t n) {
    const auto colon = pattern.find(':');
    if (colon == std::string::npos) throw ParseError("bad selection pattern '" + pattern + "'");
    const std::string args = pattern.substr(colon + 1);
    std::size_t k = 0, l = 0;
    const auto comma = args.find(',');
    try {
        k = std::stoul(args.substr(0, comma));
        if (comma != std::string::npos) l = std::stoul(args.substr(comma + 1));
    } catch (const std::exception&) {
        throw ParseError("bad indices in pattern '" + pattern + "'");
    }
    if (k < 1 || k > n || (comma != std::string::npos && (l < 1 || l > n))) {
        throw ParseError("pattern index outside 1.." + std::to_string(n));
    }
    return {k, l};
}

// observable selection, e.g. "unit:1", "sym:1,2", "asym:1,2", "z:1,2"
Matrix observable_from_pattern(const std::string& pattern, std::size_t n) {
    const auto [k, l] = parse_pattern_indices(pattern, n);
    const std::string kind = pattern.substr(0, pattern.find(':'));
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto ki = static_cast<Eigen::Index>(k - 1);
    const auto li = static_cast<Eigen::Index>(l == 0 ? 0 : l - 1);
    const double r = 1.0 / std::sqrt(2.0);
    if (kind == "unit") {
        a(ki, ki) = 1.0;
    } else if (kind == "sym") {
        a(ki, li) = r;
        a(li, ki) = r;
    } else if (kind == "asym") {
        a(ki, li) = Complex(0.0, -r);
        a(li, ki) = Complex(0.0, r);
    } else if (kind == "z") {
        a(ki, ki) = 1.0;
        a(li, li) = -1.0;
    } else {
        throw ParseError("unknown observable pattern '" + kind + "'");
    }
    return a;
}

// state selection, e.g. "basis:2", "plus:1,2", "phase:1,2"
Matrix state_from_pattern(const std::string& pattern, std::size_t n) {
    const auto [k, l] = parse_pattern_indices(pattern, n);
    const std::string kind = pattern.substr(0, pattern.find(':'));
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
    const auto ki = static_cast<Eigen::Index>(k - 1);
    const auto li = static_cast<Eigen::Index>(l == 0 ? 0 : l - 1);
    const double r = 1.0 / std::sqrt(2.0);
    if (kind == "basis") {
        v(ki) = 1.0;
    } else if (kind == "plus") {
        v(ki) = r;
        v(li) = r;
    } else if (kind == "phase") {
        v(ki) = r;
        v(li) = Complex(0.0, r);
    } else {
        throw ParseError("unknown state pattern '" + kind + "'");
    }
    return v * v.adjoint();
}

int cmd_simulate(const CommonOptions& opt, bool with_oracle) {
    const ModelSpec spec = resolve_model(opt);
    const ReservoirGrid grid = resolve_grid(spec, opt);
    const auto samples = thinned_samples(opt.steps, 1000);

    if (with_oracle && spec.system.n * (1 + grid.size()) > 20000) {
        throw ParseError("oracle dimension gate exceeded");
    }

    const SimulationResult run = simulate_reduced(spec, grid, opt.dt, opt.steps, samples);
    const std::vector<double> defects = norm_defect(run.traj, run.exc);
    const bool as_json = opt.format == "json";

    if (as_json) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t s = 0; s < defects.size(); ++s) {
            rows.push_back({{"t", run.exc.time(s)}, {"norm_defect", defects[s]}});
        }
        write_text(output_file(opt, "norm_defect.json"), rows.dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_trajectory_csv(run.traj, os);
        write_text(output_file(opt, "amplitude.csv"), os.str());
        std::ostringstream ds;
        write_defect_csv(run.exc, defects, ds);
        write_text(output_file(opt, "norm_defect.csv"), ds.str());
    }
    write_text(output_file(opt, "trajectory.json"), trajectory_to_json(run.traj).dump(2) + "\n");

    if (with_oracle) {
        const DiscretizedHamiltonian oracle(spec, grid);
        std::ostringstream os;
        os << "t,amplitude_gap\n";
        nlohmann::json rows = nlohmann::json::array();
        double worst = 0.0;
        for (std::size_t idx : samples) {
            const double t = run.traj.time(idx);
            const double gap =
                (run.traj.at(idx) - oracle.exact_amplitude(t)).cwiseAbs().maxCoeff();
            worst = std::max(worst, gap);
            os << format_sci(t) << "," << format_sci(gap) << "\n";
            rows.push_back({{"t", t}, {"amplitude_gap", gap}});
        }
        if (as_json) {
            write_text(output_file(opt, "oracle_compare.json"), rows.dump(2) + "\n");
        } else {
            write_text(output_file(opt, "oracle_compare.csv"), os.str());
        }
        std::cout << "max |A - A_oracle| = " << worst << "\n";
    }

    const double top_singular = max_singular_value(run.traj);
    std::cout << "steps=" << opt.steps << " dt=" << opt.dt
              << " max_singular=" << top_singular
              << " max_norm_defect=" << *std::max_element(defects.begin(), defects.end())
              << "\n";
    if (top_singular > 1.0 + 1e-6) {
        std::cerr << "contraction gate violated: max singular value " << top_singular << "\n";
        return 1;
    }
    return 0;
}

int cmd_choi(const CommonOptions& opt, double cp_gate, double tp_gate,
             std::size_t sample_count) {
    const ModelSpec spec = resolve_model(opt);
    const ReservoirGrid grid = resolve_grid(spec, opt);
    const auto samples = thinned_samples(opt.steps, sample_count);

    const SimulationResult run = simulate_reduced(spec, grid, opt.dt, opt.steps, samples);
    const CertificationReport report = certify(run.traj, run.exc, cp_gate, tp_gate);
    write_text(output_file(opt, "certification.json"),
               certification_to_json(report).dump(2) + "\n");

    std::cout << "worst choi eigenvalue " << report.worst_choi_eigenvalue()
              << ", worst trace defect " << report.worst_trace_defect() << "\n";
    if (!report.passed) {
        for (const auto& rec : report.records) {
            if (rec.choi_min_eigenvalue < cp_gate || rec.trace_defect > tp_gate) {
                std::cerr << "certification failed at t = " << rec.t << "\n";
                break;
            }
        }
        return 1;
    }
    std::cout << "certification passed\n";
    return 0;
}

int cmd_poles(const CommonOptions& opt, PoleSearchBox box, std::size_t seeds) {
    const ModelSpec spec = resolve_model(opt);
    if (box.re_min == 0.0 && box.re_max == 0.0 && box.im_min == 0.0 && box.im_max == 0.0) {
        const double scale = spectral_scale(spec);
        box = {-4.0 * scale, 0.0, -2.0 * scale, 2.0 * scale};
    }
    const auto poles = find_poles(spec, box, seeds);
    write_text(output_file(opt, "poles.json"), poles_to_json(poles).dump(2) + "\n");
    if (poles.empty()) {
        std::cerr << "no poles converged in the search box\n";
        return 1;
    }
    for (const auto& pole : poles) {
        std::printf("pole  % .12e %+.12ei   |det| = %.3e\n", pole.location.real(),
                    pole.location.imag(), pole.det_residual);
    }
    return 0;
}

int cmd_duality(const CommonOptions& opt, const std::string& obs_pattern,
                const std::string& state_pattern, std::vector<double> times,
                double defect_gate) {
    const ModelSpec spec = resolve_model(opt);
    const ReservoirGrid grid = resolve_grid(spec, opt);
    const Matrix a = observable_from_pattern(obs_pattern, spec.system.n);
    const Matrix rho = state_from_pattern(state_pattern, spec.system.n);
    if (times.empty()) times = {0.5, 1.0, 2.0};

    const auto blocks = evolve_observable(spec, grid, a, times, opt.dt, false);

    std::ostringstream os;
    os << "t,heisenberg_value,schrodinger_value,defect\n";
    nlohmann::json rows = nlohmann::json::array();
    double worst = 0.0;
    for (std::size_t s = 0; s < times.size(); ++s) {
        const double heis = (blocks[s].a00 * rho).trace().real();
        const auto m_steps = static_cast<std::size_t>(std::round(times[s] / opt.dt));
        double schro = (a * rho).trace().real();
        if (m_steps > 0) {
            const KernelTable kernel =
                tabulate_kernel(spec, opt.dt, m_steps, EvalMode::quadrature(grid));
            const AmplitudeTrajectory traj = solve_amplitude(spec, kernel, opt.dt, m_steps);
            const ExcitationTrajectory exc =
                reconstruct_excitation(spec, traj, grid, {m_steps});
            schro = (a * evolve_density(rho, kraus_snapshot(traj, exc, 0))).trace().real();
        }
        const double defect = std::abs(heis - schro);
        worst = std::max(worst, defect);
        os << format_sci(times[s]) << "," << format_sci(heis) << "," << format_sci(schro)
           << "," << format_sci(defect) << "\n";
        rows.push_back({{"t", times[s]},
                        {"heisenberg_value", heis},
                        {"schrodinger_value", schro},
                        {"defect", defect}});
    }
    if (opt.format == "json") {
        write_text(output_file(opt, "duality.json"), rows.dump(2) + "\n");
    } else {
        write_text(output_file(opt, "duality.csv"), os.str());
    }
    std::cout << "worst duality defect " << worst << "\n";
    return worst <= defect_gate ? 0 : 1;
}

int cmd_kernel(const CommonOptions& opt) {
    const ModelSpec spec = resolve_model(opt);
    const double t_max = opt.dt * static_cast<double>(opt.steps);
    const ReservoirGrid grid = (opt.grid_n > 0 || opt.omega_max > 0.0 || spec.grid)
                                   ? kernel_grid_for_run(resolve_grid(spec, opt), t_max)
                                   : kernel_rule_grid(spec, t_max);
    const KernelTable table =
        tabulate_kernel(spec, opt.dt, opt.steps, EvalMode::quadrature(grid));
    if (opt.format == "json") {
        nlohmann::json out;
        out["dt"] = table.dt;
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t j = 0; j < table.samples.size(); ++j) {
            nlohmann::json entries = nlohmann::json::array();
            const Matrix& kern = table.samples[j];
            for (Eigen::Index r = 0; r < kern.rows(); ++r) {
                for (Eigen::Index c = 0; c < kern.cols(); ++c) {
                    entries.push_back({kern(r, c).real(), kern(r, c).imag()});
                }
            }
            rows.push_back({{"t", table.dt * static_cast<double>(j)}, {"k", entries}});
        }
        out["samples"] = rows;
        write_text(output_file(opt, "kernel.json"), out.dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_kernel_csv(table, spec.system.n, os);
        write_text(output_file(opt, "kernel.csv"), os.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced dynamics of an n-level system in a vacuum bosonic reservoir"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* simulate = app.add_subcommand("simulate", "solve A(t), reconstruct B_j(t)");
    add_common(simulate, opt);
    bool with_oracle = false;
    simulate->add_flag("--oracle", with_oracle, "compare against exact diagonalisation");

    auto* choi_cmd = app.add_subcommand("choi", "certify complete positivity");
    add_common(choi_cmd, opt);
    double cp_gate = -1e-8, tp_gate = 1e-4;
    std::size_t sample_count = 50;
    choi_cmd->add_option("--cp-gate", cp_gate, "min allowed Choi eigenvalue");
    choi_cmd->add_option("--tp-gate", tp_gate, "max allowed trace defect")
        ->check(CLI::PositiveNumber);
    choi_cmd->add_option("--samples", sample_count, "certification sample count")
        ->check(CLI::PositiveNumber);

    auto* poles_cmd = app.add_subcommand("poles", "second-sheet resonance poles");
    add_common(poles_cmd, opt);
    PoleSearchBox box{0.0, 0.0, 0.0, 0.0};
    std::size_t seeds = 5;
    poles_cmd->add_option("--re-min", box.re_min, "search box left edge");
    poles_cmd->add_option("--re-max", box.re_max, "search box right edge (<= 0)");
    poles_cmd->add_option("--im-min", box.im_min, "search box bottom edge");
    poles_cmd->add_option("--im-max", box.im_max, "search box top edge");
    poles_cmd->add_option("--seeds", seeds, "Newton seeds per dimension")
        ->check(CLI::PositiveNumber);

    auto* duality_cmd = app.add_subcommand("duality", "Heisenberg/Schrodinger cross-check");
    add_common(duality_cmd, opt);
    std::string obs_pattern = "unit:1";
    std::string state_pattern = "basis:1";
    std::vector<double> times;
    double defect_gate = 1e-4;
    duality_cmd->add_option("--observable", obs_pattern,
                            "unit:k | sym:k,l | asym:k,l | z:k,l");
    duality_cmd->add_option("--state", state_pattern, "basis:k | plus:k,l | phase:k,l");
    duality_cmd->add_option("--times", times, "sample times (multiples of dt)");
    duality_cmd->add_option("--defect-gate", defect_gate, "max allowed defect")
        ->check(CLI::PositiveNumber);

    auto* kernel_cmd = app.add_subcommand("kernel", "tabulate the memory kernel");
    add_common(kernel_cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opt, with_oracle);
        if (choi_cmd->parsed()) return cmd_choi(opt, cp_gate, tp_gate, sample_count);
        if (poles_cmd->parsed()) return cmd_poles(opt, box, seeds);
        if (duality_cmd->parsed()) {
            return cmd_duality(opt, obs_pattern, state_pattern, times, defect_gate);
        }
        if (kernel_cmd->parsed()) return cmd_kernel(opt);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
