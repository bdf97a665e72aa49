#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "unravel/cli/commands.hpp"
#include "unravel/cli/model_spec.hpp"
#include "unravel/cli/output.hpp"

using namespace unravel;
using namespace unravel::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json damping_spec()
{
    return json::parse(R"({
        "dim": 2,
        "hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]],
        "lindblad_ops": [ [[[0, 0], [1, 0]], [[0, 0], [0, 0]]] ],
        "measurement": {
            "effects": [ [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
                         [[[0, 0], [0, 0]], [[0, 0], [1, 0]]] ],
            "eigenvalues": [-1, 1]
        },
        "initial_state": [[0, 0], [1, 0]],
        "grid": {"t0": 0, "dt": 0.001, "steps": 2000},
        "ensemble": {"n_traj": 200, "seed": 5, "unraveling": "poisson"}
    })");
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("unravel_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string spec_error(const json& doc)
{
    try {
        parse_model_json(doc);
    } catch (const SpecError& e) {
        return e.what();
    }
    return "";
}

int run_tool(const std::string& args)
{
    const std::string cmd = std::string(UNRAVEL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("minimal damping spec parses and round-trips")
{
    const EnsembleConfig config = parse_model_json(damping_spec());
    CHECK(config.model.dim() == 2);
    CHECK(config.model.channels() == 1);
    CHECK(config.meas.outcomes() == 2);
    CHECK(config.n_traj == 200);
    CHECK(config.master_seed == 5);
    CHECK(config.unraveling == Unraveling::poisson);
    CHECK(config.grid == TimeGrid(0.0, 1e-3, 2000));

    const EnsembleConfig again = parse_model_json(to_json(config));
    CHECK(again.model.hamiltonian() == config.model.hamiltonian());
    CHECK(again.model.lindblad_op(0) == config.model.lindblad_op(0));
    CHECK(again.meas.effects() == config.meas.effects());
    CHECK(again.meas.eigenvalues() == config.meas.eigenvalues());
    CHECK(again.psi0 == config.psi0);
    CHECK(again.grid == config.grid);
    CHECK(to_json(again) == to_json(config));
}

TEST_CASE("optional fields take defaults")
{
    json doc = damping_spec();
    doc.erase("ensemble");
    doc["grid"].erase("dt");
    doc["measurement"].erase("eigenvalues");
    const EnsembleConfig config = parse_model_json(doc);
    CHECK(config.grid.dt == doctest::Approx(1e-2));
    CHECK(config.n_traj == 10000);
    CHECK(config.unraveling == Unraveling::wiener);
    CHECK_FALSE(config.meas.eigenvalues().has_value());
    doc.erase("lindblad_ops");
    CHECK(parse_model_json(doc).model.channels() == 0);
}

TEST_CASE("spec errors name the offending field")
{
    json doc = damping_spec();
    doc["hamiltonian"][0][1] = {0.5, 0.0};
    const std::string herm = spec_error(doc);
    CHECK(herm.find("$.hamiltonian[0][1]") == 0);
    CHECK(herm.find("Hermitian") != std::string::npos);

    doc = damping_spec();
    doc["measurement"]["effects"][1][1][1] = {0.9, 0.0};
    const std::string comp = spec_error(doc);
    CHECK(comp.find("$.measurement.effects") == 0);
    CHECK(comp.find("max deviation 0.1") != std::string::npos);

    doc = damping_spec();
    doc["initial_state"] = {{1, 0}, {1, 0}};
    CHECK(spec_error(doc).find("$.initial_state") == 0);
    CHECK(spec_error(doc).find("not normalized") != std::string::npos);

    doc = damping_spec();
    doc["grid"]["colour"] = "blue";
    CHECK(spec_error(doc).find("$.grid.colour: unknown key") == 0);

    doc = damping_spec();
    doc.erase("hamiltonian");
    CHECK(spec_error(doc).find("$.hamiltonian: missing") == 0);

    doc = damping_spec();
    doc["lindblad_ops"][0][1] = {{0, 0}};
    CHECK(spec_error(doc).find("$.lindblad_ops[0][1]") == 0);

    doc = damping_spec();
    doc["hamiltonian"][1][1] = {"x", 0};
    CHECK(spec_error(doc).find("$.hamiltonian[1][1][0]") == 0);

    doc = damping_spec();
    doc["ensemble"]["unraveling"] = "levy";
    CHECK(spec_error(doc).find("$.ensemble.unraveling") == 0);

    doc = damping_spec();
    doc["grid"]["dt"] = 0.5;
    CHECK(spec_error(doc).find("$.grid.dt") == 0);

    doc = damping_spec();
    doc["ensemble"]["n_traj"] = 1;
    CHECK(spec_error(doc).find("$.ensemble.n_traj") == 0);
}

TEST_CASE("tolerances at load")
{
    json doc = damping_spec();
    doc["initial_state"][1] = {1.0 + 2e-9, 0.0};  // |psi|^2 off by 4e-9
    CHECK_NOTHROW(parse_model_json(doc));
    doc["hamiltonian"][0][1] = {5e-9, 0.0};
    CHECK_NOTHROW(parse_model_json(doc));
    doc["measurement"]["effects"][1][1][1] = {1.0 + 5e-9, 0.0};
    CHECK_NOTHROW(parse_model_json(doc));
    doc["measurement"]["effects"][1][1][1] = {1.0 + 5e-8, 0.0};
    CHECK_THROWS_AS(parse_model_json(doc), SpecError);
}

TEST_CASE("presets")
{
    CHECK(preset_names() == std::vector<std::string>{"damping", "rabi"});
    const EnsembleConfig rabi = preset("rabi");
    CHECK(std::abs(rabi.model.hamiltonian()(0, 1) - 1.0) < 1e-15);
    CHECK(rabi.psi0 == StateVector::basis(2, 1));
    CHECK(rabi.n_traj == 10000);
    CHECK(rabi.grid == TimeGrid(0.0, 1e-3, 2000));
    CHECK(preset("damping").model.hamiltonian().norm() == 0.0);
    CHECK_THROWS_AS(preset("laser"), SpecError);
}

TEST_CASE("doubles round-trip through 17 significant digits")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng) * std::pow(10.0, (i % 40) - 20);
        CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("cmd_master writes the decay and re-parses exactly")
{
    const fs::path dir = scratch("master");
    const EnsembleConfig config = parse_model_json(damping_spec());
    CommandOptions options;
    options.out_dir = dir;
    CHECK(cmd_master(config, options) == kExitOk);
    CHECK(slurp(dir / "master.csv").rfind("# t [time], rho_gg [1], rho_ee [1]", 0) == 0);
    const auto rows = read_csv(dir / "master.csv");
    REQUIRE(rows.size() == 2001);
    CHECK(rows[1000][0] == 1.0);
    CHECK(std::abs(rows[1000][2] - std::exp(-1.0)) < 1e-6);

    const MasterSolution sol = integrate_master(config.model, projector_of(config.psi0), config.grid);
    for (std::size_t k = 0; k < rows.size(); k += 37) {
        CHECK(rows[k][1] == sol.states[k](0, 0).real());
        CHECK(rows[k][2] == sol.states[k](1, 1).real());
        CHECK(rows[k][7] == von_neumann_entropy(sol.states[k]));
    }
    const json summary = json::parse(slurp(dir / "master_summary.json"));
    CHECK(summary["steps"] == 2000);
}

TEST_CASE("cmd_ensemble: the jump unraveling of damping has zero trajectory entropy")
{
    const fs::path dir = scratch("ensemble");
    const EnsembleConfig config = parse_model_json(damping_spec());
    CommandOptions options;
    options.out_dir = dir;
    options.workers = 2;
    CHECK(cmd_ensemble(config, options) == kExitOk);
    const std::string csv = slurp(dir / "ensemble.csv");
    std::istringstream lines(csv);
    std::string comment, header;
    std::getline(lines, comment);
    std::getline(lines, header);
    std::vector<std::string> names;
    std::stringstream hs(header);
    for (std::string name; std::getline(hs, name, ',');) names.push_back(name);
    const auto col = static_cast<std::size_t>(std::find(names.begin(), names.end(), "mean_S") - names.begin());
    REQUIRE(col < names.size());
    const auto rows = read_csv(dir / "ensemble.csv");
    REQUIRE(rows.size() == 2001);
    for (const auto& row : rows) CHECK(row[col] == 0.0);

    const json summary = json::parse(slurp(dir / "ensemble_summary.json"));
    CHECK(summary["unraveling"] == "poisson");
    CHECK(summary["n_traj"] == 200);
    CHECK(fs::exists(dir / "second_moment.csv"));
}

TEST_CASE("reruns are byte-identical for any worker count")
{
    EnsembleConfig config = parse_model_json(damping_spec());
    config.model = preset("rabi").model;
    config.grid = TimeGrid(0.0, 1e-3, 400);
    config.n_traj = 100;
    for (const std::string cmd : {"ensemble", "functionals"}) {
        std::vector<std::string> outputs;
        for (std::size_t workers : {1, 4, 16}) {
            const fs::path dir = scratch(cmd + std::to_string(workers));
            CommandOptions options;
            options.out_dir = dir;
            options.workers = workers;
            options.trajectory = 3;
            if (cmd == "ensemble") cmd_ensemble(config, options);
            else cmd_functionals(config, options);
            std::string all;
            for (const auto& entry : fs::directory_iterator(dir)) all += entry.path().filename().string() + slurp(entry.path());
            outputs.push_back(all);
        }
        CHECK(outputs[0] == outputs[1]);
        CHECK(outputs[0] == outputs[2]);
    }
}

TEST_CASE("cmd_compare exit status follows its thresholds")
{
    CommandOptions options;
    options.workers = 2;

    // stationary state without channels: every trajectory equals the master solution
    EnsembleConfig still = parse_model_json(damping_spec());
    OperatorMatrix sz = OperatorMatrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    still.model = LindbladModel(sz, {});
    still.grid = TimeGrid(0.0, 1e-3, 300);
    still.n_traj = 20;
    options.out_dir = scratch("compare_pass");
    CHECK(cmd_compare(still, options) == kExitOk);
    CHECK(json::parse(slurp(options.out_dir / "compare_summary.json"))["pass"] == true);
    for (const char* f : {"compare_wiener.csv", "compare_poisson.csv", "second_moment_wiener.csv",
                          "second_moment_poisson.csv", "discrepancy.csv", "master.csv"}) {
        CHECK(fs::exists(options.out_dir / f));
    }

    EnsembleConfig config = parse_model_json(damping_spec());
    config.grid = TimeGrid(0.0, 1e-3, 300);
    config.n_traj = 100;
    options.out_dir = scratch("compare_fail");
    CompareThresholds strict;
    strict.max_trace_distance = 0.0;
    CHECK(cmd_compare(config, options, strict) == kExitThresholdViolated);
    const json summary = json::parse(slurp(options.out_dir / "compare_summary.json"));
    CHECK(summary["pass"] == false);
    CHECK(summary["wiener"]["max_trace_distance"]["pass"] == false);
}

TEST_CASE("cmd_functionals reports a trajectory's corrections")
{
    const fs::path dir = scratch("functionals");
    EnsembleConfig config = parse_model_json(damping_spec());
    config.unraveling = Unraveling::wiener;
    CommandOptions options;
    options.out_dir = dir;
    options.trajectory = 2;
    CHECK(cmd_functionals(config, options) == kExitOk);
    const auto rows = read_csv(dir / "functionals.csv");
    REQUIRE(rows.size() == 2001);
    for (const auto& row : rows) {
        // t, p_0, p_1, S, wiener_correction, f, poisson_correction, E_X, boundary_flag
        CHECK(row[3] >= 0.0);
        if (row[8] == 0.0) {
            CHECK(row[4] <= 1e-12);
            CHECK(row[5] >= -1e-12);
            CHECK(row[6] == -row[5]);
        }
    }
    const json summary = json::parse(slurp(dir / "functionals_summary.json"));
    CHECK(summary["trajectory"] == 2);
}

TEST_CASE("command-line exit codes")
{
    const fs::path dir = scratch("tool");
    std::ofstream(dir / "bad.json") << R"({"dim": 2})";
    CHECK(run_tool("master --preset damping --out " + (dir / "m").string()) == kExitOk);
    CHECK(fs::exists(dir / "m" / "master.csv"));
    CHECK(run_tool("master --spec " + (dir / "bad.json").string() + " --out " + dir.string()) == kExitInvalidInput);
    CHECK(run_tool("master --preset laser --out " + dir.string()) == kExitInvalidInput);
    CHECK(run_tool("master --preset damping") == kExitInvalidInput);
    CHECK(run_tool("ensemble --preset damping --n-traj 1 --out " + dir.string()) == kExitInvalidInput);
    CHECK(run_tool("bogus --preset damping --out " + dir.string()) == kExitInvalidInput);
    CHECK(run_tool("functionals --preset rabi --trajectory 4 --out " + (dir / "f").string()) == kExitOk);
}
