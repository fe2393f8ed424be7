#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "friedsim/io.hpp"

using namespace friedsim;
namespace fs = std::filesystem;

namespace {

const char* const valid_model = R"({
  "system": {"energies": [0.0, 1.5]},
  "lambda": 0.7,
  "channels": [
    {"i": 1, "j": 2,
     "profile": {"kind": "lorentzian", "g": 1.0, "kappa": 2.0, "mu": 0.5,
                 "support": "extended"},
     "phase_degrees": 90.0}
  ],
  "shift": [[0.0,0.0],[0.25,0.5],[0.25,-0.5],[1.0,0.0]],
  "grid": {"scheme": "gauss_legendre", "n": 32, "omega_max": 12.0}
})";

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("friedsim_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& dir, const std::string& tag) {
    const std::string cmd = std::string(FRIEDSIM_CLI_PATH) + " " + args + " >" +
                            (dir / (tag + ".out")).string() + " 2>" +
                            (dir / (tag + ".err")).string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("model files parse every documented key") {
    const ModelSpec spec = model_from_json(nlohmann::json::parse(valid_model));
    CHECK(spec.system.n == 2);
    CHECK(spec.lambda == 0.7);
    REQUIRE(spec.channels.channels.size() == 1);
    const Channel& c = spec.channels.channels[0];
    CHECK(c.i == 1);
    CHECK(c.j == 2);
    CHECK(c.profile.kind == ProfileKind::Lorentzian);
    CHECK(c.profile.support == Support::Extended);
    CHECK(c.phase == doctest::Approx(pi / 2.0));
    REQUIRE(spec.shift.has_value());
    CHECK((*spec.shift)(0, 1) == Complex(0.25, 0.5));
    CHECK((*spec.shift)(1, 0) == Complex(0.25, -0.5));
    REQUIRE(spec.grid.has_value());
    CHECK(spec.grid->size() == 32);
    CHECK(spec.grid->omega_max == 12.0);
    CHECK(validate(spec).ok());
}

TEST_CASE("unknown keys are rejected wherever they appear") {
    auto base = nlohmann::json::parse(valid_model);

    auto with_extra_top = base;
    with_extra_top["surprise"] = 1;
    CHECK_THROWS_WITH_AS(model_from_json(with_extra_top),
                         "unknown key 'surprise' in model file", ParseError);

    auto with_extra_system = base;
    with_extra_system["system"]["label"] = "x";
    CHECK_THROWS_AS(model_from_json(with_extra_system), ParseError);

    auto with_extra_channel = base;
    with_extra_channel["channels"][0]["color"] = "red";
    CHECK_THROWS_AS(model_from_json(with_extra_channel), ParseError);

    auto with_extra_profile = base;
    with_extra_profile["channels"][0]["profile"]["sigma"] = 1.0; // not a lorentzian key
    CHECK_THROWS_AS(model_from_json(with_extra_profile), ParseError);

    auto with_extra_grid = base;
    with_extra_grid["grid"]["padding"] = 2;
    CHECK_THROWS_AS(model_from_json(with_extra_grid), ParseError);
}

TEST_CASE("missing required keys are named in the diagnostic") {
    auto base = nlohmann::json::parse(valid_model);
    base.erase("lambda");
    CHECK_THROWS_WITH_AS(model_from_json(base), "missing key 'lambda' in model file",
                         ParseError);
}

TEST_CASE("profile variants parse") {
    const auto gauss = nlohmann::json::parse(
        R"({"system": {"energies": [0.0]}, "lambda": 1.0,
            "channels": [{"i":1,"j":1,
              "profile": {"kind":"gaussian","g":0.5,"sigma":1.5,"mu":3.0}}]})");
    CHECK(model_from_json(gauss).channels.channels[0].profile.kind == ProfileKind::Gaussian);

    const auto tab = nlohmann::json::parse(
        R"({"system": {"energies": [0.0]}, "lambda": 1.0,
            "channels": [{"i":1,"j":1,
              "profile": {"kind":"tabulated","nodes":[0.0,1.0],"values":[0.5,0.5]}}]})");
    CHECK(model_from_json(tab).channels.channels[0].profile.kind == ProfileKind::Tabulated);

    const auto bad = nlohmann::json::parse(
        R"({"system": {"energies": [0.0]}, "lambda": 1.0,
            "channels": [{"i":1,"j":1, "profile": {"kind":"flat"}}]})");
    CHECK_THROWS_AS(model_from_json(bad), ParseError);
}

TEST_CASE("presets ship valid acceptance models") {
    for (const std::string name : {"reference-single-level", "two-level-decay"}) {
        const ModelSpec spec = model_from_json(nlohmann::json::parse(preset_model(name)));
        CHECK(validate(spec).ok());
        REQUIRE(spec.grid.has_value());
        CHECK(spec.grid->size() == 400);
        CHECK(spec.grid->omega_max == 200.0);
    }
    CHECK_THROWS_AS(preset_model("missing"), ParseError);
}

TEST_CASE("trajectory CSV uses 17 significant lowercase digits") {
    AmplitudeTrajectory traj;
    traj.dt = 0.1;
    traj.samples = {Matrix::Identity(1, 1), 0.5 * Matrix::Identity(1, 1)};
    std::ostringstream os;
    write_trajectory_csv(traj, os);
    const std::string text = os.str();
    CHECK(text.find("5.0000000000000000e-01") != std::string::npos);
    CHECK(text.find('E') == std::string::npos);
    CHECK(text.rfind("t,ReA_1_1,ImA_1_1\n", 0) == 0);
}

TEST_CASE("cli: simulate happy path writes the three data files") {
    const fs::path dir = fresh_dir("simulate");
    const int code = run_cli("simulate --preset reference-single-level --dt 1e-2 --steps 50 "
                             "--grid-n 64 --output-dir " + dir.string(),
                             dir, "run");
    CHECK(code == 0);
    CHECK(fs::exists(dir / "amplitude.csv"));
    CHECK(fs::exists(dir / "norm_defect.csv"));
    CHECK(fs::exists(dir / "trajectory.json"));
}

TEST_CASE("cli: simulate --format json swaps the data files") {
    const fs::path dir = fresh_dir("simjson");
    const int code = run_cli("simulate --preset reference-single-level --dt 1e-2 --steps 20 "
                             "--grid-n 48 --format json --output-dir " + dir.string(),
                             dir, "run");
    CHECK(code == 0);
    CHECK(fs::exists(dir / "trajectory.json"));
    CHECK(fs::exists(dir / "norm_defect.json"));
    CHECK_FALSE(fs::exists(dir / "amplitude.csv"));
}

TEST_CASE("cli: oracle comparison and its dimension gate") {
    const fs::path dir = fresh_dir("oracle");
    const int ok = run_cli("simulate --preset reference-single-level --dt 1e-2 --steps 20 "
                           "--grid-n 48 --oracle --output-dir " + dir.string(),
                           dir, "ok");
    CHECK(ok == 0);
    CHECK(fs::exists(dir / "oracle_compare.csv"));

    const int gated = run_cli("simulate --preset reference-single-level --dt 1e-2 --steps 2 "
                              "--grid-n 20001 --oracle --output-dir " + dir.string(),
                              dir, "gate");
    CHECK(gated == 2);
    CHECK(slurp(dir / "gate.err").find("oracle dimension gate exceeded") != std::string::npos);
}

TEST_CASE("cli: malformed model file exits 2 naming the missing key") {
    const fs::path dir = fresh_dir("badmodel");
    const fs::path model = dir / "broken.json";
    std::ofstream(model) << R"({"system": {"energies": [0.0]}, "channels": []})";
    const int code =
        run_cli("simulate --model " + model.string() + " --output-dir " + dir.string(),
                dir, "run");
    CHECK(code == 2);
    CHECK(slurp(dir / "run.err").find("lambda") != std::string::npos);
}

TEST_CASE("cli: kernel subcommand is deterministic and honors zero channels") {
    const fs::path dir = fresh_dir("kernel");
    const fs::path model = dir / "zero.json";
    std::ofstream(model) << R"({"system": {"energies": [0.0, 1.0]}, "lambda": 1.0,
                               "channels": [],
                               "grid": {"scheme": "gauss_legendre", "n": 16, "omega_max": 10.0}})";
    const std::string args = "kernel --model " + model.string() + " --dt 0.1 --steps 5 "
                             "--output-dir " + dir.string();
    CHECK(run_cli(args, dir, "a") == 0);
    const std::string first = slurp(dir / "kernel.csv");
    CHECK(run_cli(args, dir, "b") == 0);
    CHECK(first == slurp(dir / "kernel.csv"));

    std::istringstream lines(first);
    std::string line;
    std::getline(lines, line); // header
    while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        CHECK(line.substr(comma + 1).find_first_not_of("0.e+-,") == std::string::npos);
    }
}

TEST_CASE("cli: choi certification passes on a resolved grid and fails on N = 10") {
    const fs::path dir = fresh_dir("choi");
    const int ok = run_cli("choi --preset two-level-decay --dt 1e-3 --steps 300 "
                           "--grid-n 100 --samples 5 --output-dir " + dir.string(),
                           dir, "ok");
    CHECK(ok == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "certification.json"));
    CHECK(report["passed"].get<bool>());
    CHECK(report["records"].size() == 6); // t = 0 plus five thinned samples

    const int fail = run_cli("choi --preset two-level-decay --dt 1e-3 --steps 2000 "
                             "--grid-n 10 --samples 4 --output-dir " + dir.string(),
                             dir, "fail");
    CHECK(fail == 1);
    CHECK(slurp(dir / "fail.err").find("certification failed at t") != std::string::npos);
}

TEST_CASE("cli: poles finds the reference pair and flags empty boxes") {
    const fs::path dir = fresh_dir("poles");
    const int code = run_cli("poles --preset reference-single-level "
                             "--re-min -6 --re-max 0 --im-min -3 --im-max 3 "
                             "--output-dir " + dir.string(),
                             dir, "run");
    CHECK(code == 0);
    const auto poles = nlohmann::json::parse(slurp(dir / "poles.json"));
    REQUIRE(poles.size() == 2);
    CHECK(poles[0]["re"].get<double>() == doctest::Approx(-0.2087).epsilon(1e-3));
    CHECK(poles[1]["re"].get<double>() == doctest::Approx(-4.7913).epsilon(1e-3));

    const fs::path model = dir / "free.json";
    std::ofstream(model) << R"({"system": {"energies": [0.0]}, "lambda": 0.0,
        "channels": [{"i":1,"j":1,
          "profile": {"kind":"lorentzian","g":1.0,"kappa":5.0,"mu":0.0}}]})";
    const int empty = run_cli("poles --model " + model.string() +
                              " --re-min -6 --re-max 0 --im-min -3 --im-max 3 "
                              "--output-dir " + dir.string(),
                              dir, "empty");
    CHECK(empty == 1);
}

TEST_CASE("cli: duality on the uncoupled model is exact and exits 0") {
    const fs::path dir = fresh_dir("duality");
    const fs::path model = dir / "free.json";
    std::ofstream(model) << R"({"system": {"energies": [0.0, 1.0]}, "lambda": 0.0,
        "channels": [{"i":1,"j":2,
          "profile": {"kind":"lorentzian","g":1.0,"kappa":5.0,"mu":0.0}}],
        "grid": {"scheme": "gauss_legendre", "n": 24, "omega_max": 20.0}})";
    const int code = run_cli("duality --model " + model.string() +
                             " --observable z:1,2 --state basis:2 --dt 1e-2 "
                             "--times 0.5 --times 1.0 --output-dir " + dir.string(),
                             dir, "run");
    CHECK(code == 0);
    const std::string csv = slurp(dir / "duality.csv");
    CHECK(csv.rfind("t,heisenberg_value,schrodinger_value,defect\n", 0) == 0);
}

TEST_CASE("cli: unknown subcommand or missing model exits 2") {
    const fs::path dir = fresh_dir("usage");
    CHECK(run_cli("frobnicate", dir, "a") == 2);
    CHECK(run_cli("simulate", dir, "b") == 2); // neither --model nor --preset
    CHECK(run_cli("simulate --model nope.json --preset two-level-decay", dir, "c") == 2);
}
