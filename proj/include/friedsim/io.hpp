// io.hpp — Model files (strict JSON schema), CSV/JSON emitters, presets

#pragma once

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "friedsim/dynmap.hpp"
#include "friedsim/kernel.hpp"
#include "friedsim/model.hpp"
#include "friedsim/propagator.hpp"
#include "friedsim/resolvent.hpp"
#include "friedsim/types.hpp"

namespace friedsim {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ParseError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& key,
                                         const std::string& where) {
    if (!obj.contains(key)) {
        throw ParseError("missing key '" + key + "' in " + where);
    }
    return obj.at(key);
}

inline double number_at(const nlohmann::json& obj, const std::string& key,
                        const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_number()) throw ParseError("key '" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

inline std::size_t index_at(const nlohmann::json& obj, const std::string& key,
                            const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ParseError("key '" + key + "' in " + where + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

inline SpectralProfile profile_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + " must be an object");
    const std::string kind = require_key(j, "kind", where).get<std::string>();

    Support support = Support::Physical;
    if (j.contains("support")) {
        const std::string s = j.at("support").get<std::string>();
        if (s == "physical") {
            support = Support::Physical;
        } else if (s == "extended") {
            support = Support::Extended;
        } else {
            throw ParseError("unknown support '" + s + "' in " + where);
        }
    }

    if (kind == "lorentzian") {
        reject_unknown_keys(j, {"kind", "g", "kappa", "mu", "support"}, where);
        return SpectralProfile::lorentzian(number_at(j, "g", where), number_at(j, "kappa", where),
                                           number_at(j, "mu", where), support);
    }
    if (kind == "gaussian") {
        reject_unknown_keys(j, {"kind", "g", "sigma", "mu", "support"}, where);
        return SpectralProfile::gaussian(number_at(j, "g", where), number_at(j, "sigma", where),
                                         number_at(j, "mu", where), support);
    }
    if (kind == "tabulated") {
        reject_unknown_keys(j, {"kind", "nodes", "values"}, where);
        const auto nodes = require_key(j, "nodes", where).get<std::vector<double>>();
        const auto values = require_key(j, "values", where).get<std::vector<double>>();
        return SpectralProfile::tabulated(nodes, values);
    }
    throw ParseError("unknown profile kind '" + kind + "' in " + where);
}

} // namespace detail

inline ModelSpec model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("model file must hold a JSON object");
    detail::reject_unknown_keys(j, {"system", "lambda", "channels", "shift", "grid"},
                                "model file");

    ModelSpec spec;

    const auto& system = detail::require_key(j, "system", "model file");
    detail::reject_unknown_keys(system, {"energies"}, "system");
    spec.system.energies =
        detail::require_key(system, "energies", "system").get<std::vector<double>>();
    spec.system.n = spec.system.energies.size();

    spec.lambda = detail::number_at(j, "lambda", "model file");

    const auto& channels = detail::require_key(j, "channels", "model file");
    if (!channels.is_array()) throw ParseError("'channels' must be an array");
    for (const auto& cj : channels) {
        detail::reject_unknown_keys(cj, {"i", "j", "profile", "phase_degrees"}, "channel");
        Channel c;
        c.i = detail::index_at(cj, "i", "channel");
        c.j = detail::index_at(cj, "j", "channel");
        c.profile = detail::profile_from_json(detail::require_key(cj, "profile", "channel"),
                                              "channel profile");
        if (cj.contains("phase_degrees")) {
            c.phase = cj.at("phase_degrees").get<double>() * pi / 180.0;
        }
        spec.channels.channels.push_back(std::move(c));
    }

    if (j.contains("shift")) {
        const auto& sj = j.at("shift");
        const auto n = static_cast<Eigen::Index>(spec.system.n);
        if (!sj.is_array() || sj.size() != static_cast<std::size_t>(n * n)) {
            throw ParseError("'shift' must be a row-major array of n*n [re,im] pairs");
        }
        Matrix s(n, n);
        for (Eigen::Index k = 0; k < n * n; ++k) {
            const auto& entry = sj.at(static_cast<std::size_t>(k));
            if (!entry.is_array() || entry.size() != 2) {
                throw ParseError("'shift' entries must be [re,im] pairs");
            }
            s(k / n, k % n) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
        spec.shift = s;
    }

    if (j.contains("grid")) {
        const auto& gj = j.at("grid");
        detail::reject_unknown_keys(gj, {"scheme", "n", "omega_max"}, "grid");
        const std::string scheme_name =
            detail::require_key(gj, "scheme", "grid").get<std::string>();
        GridScheme scheme;
        if (scheme_name == "gauss_legendre") {
            scheme = GridScheme::GaussLegendre;
        } else if (scheme_name == "uniform_trapezoid") {
            scheme = GridScheme::UniformTrapezoid;
        } else {
            throw ParseError("unknown grid scheme '" + scheme_name + "'");
        }
        const auto n_nodes = detail::index_at(gj, "n", "grid");
        const double omega_max = gj.contains("omega_max")
                                     ? gj.at("omega_max").get<double>()
                                     : default_omega_max(spec);
        spec.grid = make_grid(scheme, n_nodes, omega_max);
    }

    return spec;
}

inline ModelSpec load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

// ---------------------------------------------------------------- presets --

// The two stock scenarios: a single resonant level with a flat-centred
// Lorentzian reservoir, and a two-level system whose upper level decays
// through channel (1,2).
inline std::string preset_model(const std::string& name) {
    if (name == "reference-single-level") {
        return R"({
  "system": {"energies": [0.0]},
  "lambda": 1.0,
  "channels": [
    {"i": 1, "j": 1,
     "profile": {"kind": "lorentzian", "g": 1.0, "kappa": 5.0, "mu": 0.0,
                 "support": "physical"}}
  ],
  "grid": {"scheme": "gauss_legendre", "n": 400, "omega_max": 200.0}
})";
    }
    if (name == "two-level-decay") {
        return R"({
  "system": {"energies": [0.0, 1.0]},
  "lambda": 1.0,
  "channels": [
    {"i": 1, "j": 2,
     "profile": {"kind": "lorentzian", "g": 1.0, "kappa": 5.0, "mu": 0.0,
                 "support": "physical"}}
  ],
  "grid": {"scheme": "gauss_legendre", "n": 400, "omega_max": 200.0}
})";
    }
    throw ParseError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- writers --

inline void write_trajectory_csv(const AmplitudeTrajectory& traj, std::ostream& os) {
    const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().rows();
    os << "t";
    for (Eigen::Index k = 1; k <= n; ++k) {
        for (Eigen::Index l = 1; l <= n; ++l) {
            os << ",ReA_" << k << "_" << l << ",ImA_" << k << "_" << l;
        }
    }
    os << "\n";
    for (std::size_t j = 0; j < traj.samples.size(); ++j) {
        os << format_sci(traj.time(j));
        const Matrix& a = traj.samples[j];
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index l = 0; l < n; ++l) {
                os << "," << format_sci(a(k, l).real()) << "," << format_sci(a(k, l).imag());
            }
        }
        os << "\n";
    }
}

inline nlohmann::json trajectory_to_json(const AmplitudeTrajectory& traj) {
    nlohmann::json out;
    out["dt"] = traj.dt;
    out["n"] = traj.samples.empty() ? 0 : traj.samples.front().rows();
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t j = 0; j < traj.samples.size(); ++j) {
        nlohmann::json entry;
        entry["t"] = traj.time(j);
        nlohmann::json rows = nlohmann::json::array();
        const Matrix& a = traj.samples[j];
        for (Eigen::Index k = 0; k < a.rows(); ++k) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index l = 0; l < a.cols(); ++l) {
                row.push_back({a(k, l).real(), a(k, l).imag()});
            }
            rows.push_back(row);
        }
        entry["a"] = rows;
        samples.push_back(entry);
    }
    out["samples"] = samples;
    return out;
}

inline void write_defect_csv(const ExcitationTrajectory& exc, const std::vector<double>& defects,
                             std::ostream& os) {
    os << "t,norm_defect\n";
    for (std::size_t s = 0; s < defects.size(); ++s) {
        os << format_sci(exc.time(s)) << "," << format_sci(defects[s]) << "\n";
    }
}

inline nlohmann::json certification_to_json(const CertificationReport& report) {
    nlohmann::json out;
    out["cp_gate"] = report.cp_gate;
    out["tp_gate"] = report.tp_gate;
    out["passed"] = report.passed;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) {
        records.push_back({{"t", r.t},
                           {"choi_min_eig", r.choi_min_eigenvalue},
                           {"trace_defect", r.trace_defect},
                           {"norm_defect", r.norm_defect}});
    }
    out["records"] = records;
    return out;
}

inline nlohmann::json poles_to_json(const std::vector<ResonancePole>& poles) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& pole : poles) {
        nlohmann::json res_rows = nlohmann::json::array();
        for (Eigen::Index k = 0; k < pole.residue.rows(); ++k) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index l = 0; l < pole.residue.cols(); ++l) {
                row.push_back({pole.residue(k, l).real(), pole.residue(k, l).imag()});
            }
            res_rows.push_back(row);
        }
        out.push_back({{"re", pole.location.real()},
                       {"im", pole.location.imag()},
                       {"residual", pole.det_residual},
                       {"newton_iterations", pole.newton_iterations},
                       {"residue", res_rows}});
    }
    return out;
}

} // namespace friedsim
