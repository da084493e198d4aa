#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ero/experiment.hpp"
#include "ero/level_set.hpp"
#include "ero/parallel.hpp"
#include "ero/presets.hpp"
#include "ero/results_io.hpp"

using namespace ero;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ResultRow sample_row() {
    ResultRow r;
    r.experiment_id = "demo";
    r.model = "black_scholes";
    r.payoff = "put";
    r.strike = 100.0;
    r.degree = 2;
    r.paths = 51200;
    r.steps = 16;
    r.seed = 18446744073709551615ULL;
    r.train_value = 9.871234567890123;
    r.test_value = 0.1 + 0.2;
    r.test_std_error = 1e-17;
    r.iterations = 7;
    r.evaluations = 9;
    r.stop_reason = "grad_tol";
    r.wall_time_s = 1.25;
    return r;
}

json small_put_document() {
    auto doc = preset_document("bs1d_convergence");
    doc.erase("level");
    doc["id"] = "small";
    doc["grid"] = {{"T", 1.0}, {"N", 8}};
    doc["sampling"] = {{"train_paths", 4000}, {"test_paths", 4000}, {"seed", 3}};
    doc["references"] = json::array({"closed_form"});
    return doc;
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("ero_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(ERO_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("results CSV has the documented header") {
    const std::string text = format_results({});
    CHECK(text ==
          "experiment_id,model,payoff,K,k,M,N,seed,train_value,test_value,test_std_error,iterations,evaluations,"
          "stop_reason,wall_time_s\n");
    CHECK(parse_results(text).empty());
}

TEST_CASE("results CSV round-trips exactly, including quoted fields") {
    auto a = sample_row();
    auto b = sample_row();
    b.experiment_id = "has,comma \"and quotes\"";
    b.strike = 1.0 / 3.0;
    const std::vector<ResultRow> rows = {a, b};
    const auto parsed = parse_results(format_results(rows));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == a);
    CHECK(parsed[1] == b);

    const auto dir = scratch_dir();
    emit_results(rows, (dir / "rows.csv").string());
    CHECK(read_results((dir / "rows.csv").string()) == rows);
    CHECK_THROWS_AS(emit_results(rows, "/nonexistent_dir/x/rows.csv"), IoError);
    CHECK_THROWS_AS(read_results((dir / "missing.csv").string()), IoError);
    CHECK_THROWS_AS(parse_results("not,a,header\n"), std::invalid_argument);
}

TEST_CASE("overrides set nested fields with JSON or string values") {
    json doc = {{"grid", {{"N", 4}}}};
    apply_override(doc, "grid.N=16");
    CHECK(doc["grid"]["N"] == 16);
    apply_override(doc, "payoff.type=put");
    CHECK(doc["payoff"]["type"] == "put");
    apply_override(doc, "strikes=[90,100]");
    CHECK(doc["strikes"] == json::array({90, 100}));
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "grid.N.x=1"), ConfigError);
}

TEST_CASE("unknown and malformed fields are rejected with the field name") {
    auto doc = small_put_document();
    doc["grid"]["bogus"] = 1;
    try {
        parse_experiment_config(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("grid.bogus") != std::string::npos);
    }
    doc = small_put_document();
    doc["payoff"]["strike"] = "high";
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
    doc = small_put_document();
    doc.erase("model");
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
    CHECK_THROWS_AS(preset_document("no_such_preset"), ConfigError);
}

TEST_CASE("every preset parses and validates") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        ExperimentConfig config;
        REQUIRE_NOTHROW(config = parse_experiment_config(preset_document(name)));
        CHECK_NOTHROW(validate_experiment(config));
        CHECK(config.id == name);
    }
}

TEST_CASE("ten-asset Heston correlation is a valid correlation matrix") {
    const auto config = parse_experiment_config(preset_document("heston10d"));
    const auto& spec = std::get<HestonSpec>(config.model);
    REQUIRE(spec.correlation.rows() == 11);
    CHECK((spec.correlation - spec.correlation.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(spec.correlation.diagonal().isOnes());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.correlation);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("a preset reference merges with overrides") {
    json doc = {{"preset", "bs1d_figure1"}, {"grid", {{"N", 10}}}};
    const auto config = parse_experiment_config(doc);
    CHECK(config.grid.steps == 10);
    CHECK(config.grid.expiry == 1.0);
    CHECK(config.degree == 0);
}

TEST_CASE("refinement levels") {
    CHECK(level_paths(0) == 200);
    CHECK(level_paths(4) == 51200);
    CHECK(level_steps(4) == 16);
    auto doc = small_put_document();
    doc["level"] = 2;
    const auto config = parse_experiment_config(doc);
    CHECK(config.sampling.train_paths == 3200);
    CHECK(config.sampling.test_paths == 3200);
    CHECK(config.grid.steps == 4);
    doc["level"] = 13;
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
}

TEST_CASE("path counts are checked against the basis size") {
    auto doc = small_put_document();
    doc["basis"]["degree"] = 3;  // B = 10
    doc["sampling"]["train_paths"] = 8;
    CHECK_THROWS_AS(validate_experiment(parse_experiment_config(doc)), ConfigError);
    doc["sampling"]["train_paths"] = 50;
    const auto warnings = validate_experiment(parse_experiment_config(doc));
    CHECK_FALSE(warnings.empty());
    doc["sampling"]["train_paths"] = 4000;
    CHECK(validate_experiment(parse_experiment_config(doc)).empty());
}

TEST_CASE("tree and closed-form references need a one-asset put") {
    auto doc = preset_document("basket2d");
    doc["references"] = json::array({"tree"});
    CHECK_THROWS_AS(validate_experiment(parse_experiment_config(doc)), ConfigError);
    doc = small_put_document();
    doc["lags"] = json::array({0.5});
    CHECK_THROWS_AS(validate_experiment(parse_experiment_config(doc)), ConfigError);
}

TEST_CASE("level grid with zero coefficients is the in-the-money indicator") {
    const auto config = parse_experiment_config(small_put_document());
    const auto batch = simulate(config.model, config.grid, 2000, 1);
    const auto basis = fit_orthonormal_basis(batch, 2);
    GridWindow window;
    window.axis_x = kTimeAxis;
    window.axis_y = 0;
    window.x_lo = 0.0;
    window.x_hi = 1.0;
    window.y_lo = 50.0;
    window.y_hi = 150.0;
    window.nx = 11;
    window.ny = 21;
    const std::vector<double> pinned = {100.0};
    const auto grid = rate_level_grid(Eigen::VectorXd::Zero(basis.size()), basis, config.payoff, 1, pinned, window);
    REQUIRE(grid.values.size() == 11u * 21u);
    for (int j = 0; j < window.ny; ++j) {
        for (int i = 0; i < window.nx; ++i) CHECK(grid.at(i, j) == (grid.y(j) < 100.0 ? 1.0 : 0.0));
    }
    CHECK(count_components(grid, 0.5) == 1);
    CHECK(count_components(grid, 2.0) == 0);
}

TEST_CASE("component counting and axis-swap asymmetry on synthetic grids") {
    LevelGrid grid;
    grid.window.nx = 5;
    grid.window.ny = 5;
    grid.window.x_lo = grid.window.y_lo = 0.0;
    grid.window.x_hi = grid.window.y_hi = 4.0;
    grid.values.assign(25, 0.0);
    grid.values[0] = 1.0;
    grid.values[24] = 1.0;
    grid.values[1 * 5 + 1] = 1.0;  // diagonal neighbour, not 4-connected
    CHECK(count_components(grid, 0.5) == 3);

    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 5; ++i) grid.values[static_cast<std::size_t>(j * 5 + i)] = std::exp(i + j);
    }
    CHECK(axis_swap_asymmetry(grid) == 0.0);
    grid.values[1] = std::exp(2.0);  // (i=1, j=0) vs (i=0, j=1) = e^1
    CHECK(axis_swap_asymmetry(grid) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("level grid file round trip") {
    LevelGrid grid;
    grid.window = GridWindow{0, 1, 1.5, 50.0, 250.0, 60.0, 70.0, 3, 2};
    grid.values = {0.0, 1e-300, 2.5, 1.0 / 3.0, 7.0, std::exp(30.0)};
    const auto path = (scratch_dir() / "grid.txt").string();
    write_level_grid(grid, path);
    const auto back = read_level_grid(path);
    CHECK(back.window.nx == 3);
    CHECK(back.window.ny == 2);
    CHECK(back.window.t_slice == 1.5);
    CHECK(back.window.x_hi == 250.0);
    CHECK(back.values == grid.values);
    CHECK_THROWS_AS(write_level_grid(grid, "/nonexistent_dir/x/grid.txt"), IoError);
}

TEST_CASE("runs are reproducible across thread counts with timing off") {
    auto doc = small_put_document();
    doc["strikes"] = json::array({90.0, 110.0});
    const auto config = parse_experiment_config(doc);
    set_thread_count(1);
    const auto a = run_experiment(config, RunOptions{false});
    set_thread_count(4);
    const auto b = run_experiment(config, RunOptions{false});
    set_thread_count(0);
    REQUIRE(a.size() == 2);
    CHECK(format_results(a) == format_results(b));
    CHECK(a[0].wall_time_s == 0.0);
    CHECK(a[0].strike == 90.0);
    CHECK(a[1].strike == 110.0);
    CHECK(a[1].test_value > a[0].test_value);
}

TEST_CASE("reference rows follow the row conventions") {
    auto doc = small_put_document();
    doc["references"] = json::array({"closed_form", "tree", "european", "longstaff_schwartz"});
    doc["tree_levels"] = 500;
    const auto rows = run_references(parse_experiment_config(doc), RunOptions{false});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].experiment_id == "small:closed_form");
    CHECK(rows[0].test_value == doctest::Approx(9.354197236057232));
    CHECK(rows[0].stop_reason == "none");
    CHECK(rows[1].steps == 500);
    CHECK(rows[1].paths == 0);
    CHECK(rows[2].test_std_error > 0.0);
    CHECK(rows[3].test_value > rows[2].test_value - 3.0 * rows[2].test_std_error);
}

TEST_CASE("numerical failures are categorized") {
    auto doc = small_put_document();
    doc["sampling"]["train_paths"] = 4;
    doc["sampling"]["test_paths"] = 4;
    doc["basis"]["degree"] = 1;
    try {
        run_experiment(parse_experiment_config(doc), RunOptions{false});
    } catch (const ExperimentError& e) {
        CHECK(e.category() != ErrorCategory::Other);
    }
}

TEST_CASE("command-line exit codes and output") {
    const auto dir = scratch_dir();
    const auto out = dir / "stdout.txt";
    CHECK(run_cli("--list-presets", out) == 0);
    CHECK(slurp(out).find("bs1d_convergence") != std::string::npos);

    CHECK(run_cli("price --preset bs1d_figure1 --set grid.N=8 --no-timing --threads 1", out) == 0);
    const auto rows = parse_results(slurp(out));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].steps == 8);

    const auto csv = dir / "rows.csv";
    CHECK(run_cli("price --preset bs1d_figure1 --set grid.N=8 --no-timing --output " + csv.string(), out) == 0);
    CHECK(read_results(csv.string()) == rows);

    CHECK(run_cli("price --preset bs1d_figure1 --set grid.bogus=1", out) == 2);
    CHECK(run_cli("price --preset no_such_preset", out) == 2);
    CHECK(run_cli("price --config " + (dir / "missing.json").string(), out) == 4);
    CHECK(run_cli("price --preset bs1d_figure1 --set grid.N=8 --output /nonexistent_dir/x/rows.csv", out) == 4);
    fs::remove_all(dir);
}
