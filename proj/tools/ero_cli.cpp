// ero: command-line front end for exercise rate optimization experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ero/experiment.hpp"
#include "ero/parallel.hpp"
#include "ero/presets.hpp"
#include "ero/results_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string output;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Experiment document (JSON)");
    cmd->add_option("--preset", o.preset, "Embedded experiment document; --config fields override it");
    cmd->add_option("--set", o.overrides, "Override a field: dotted.key=value (repeatable)")->allow_extra_args(false);
    cmd->add_option("--seed", o.seed, "Master seed (overrides sampling.seed)");
    cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("--output", o.output, "Output path (default: config 'output', else stdout)");
    cmd->add_flag("--no-timing", o.no_timing, "Write wall_time_s = 0 so repeated runs are byte-identical");
}

nlohmann::json load_document(const CommonOptions& o) {
    nlohmann::json document = nlohmann::json::object();
    if (!o.preset.empty()) document = ero::preset_document(o.preset);
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ero::IoError("cannot open config '" + o.config_path + "'");
        nlohmann::json file;
        try {
            file = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ero::ConfigError("config '" + o.config_path + "': " + e.what());
        }
        if (file.is_object() && file.contains("preset") && !o.preset.empty()) {
            throw ero::ConfigError("both --preset and a 'preset' key in the config file");
        }
        if (o.preset.empty()) {
            document = std::move(file);
        } else {
            document.merge_patch(file);
        }
    }
    if (o.preset.empty() && o.config_path.empty()) throw ero::ConfigError("give --config or --preset");
    for (const auto& assignment : o.overrides) ero::apply_override(document, assignment);
    if (o.seed) ero::apply_override(document, "sampling.seed=" + std::to_string(*o.seed));
    return document;
}

ero::ExperimentConfig load_config(const CommonOptions& o) {
    auto config = ero::parse_experiment_config(load_document(o));
    for (const auto& warning : ero::validate_experiment(config)) std::cerr << "warning: " << warning << '\n';
    ero::set_thread_count(o.threads);
    return config;
}

void write_rows(const std::vector<ero::ResultRow>& rows, const CommonOptions& o,
                const ero::ExperimentConfig& config) {
    const std::string path = !o.output.empty() ? o.output : config.output;
    if (path.empty() || path == "-") {
        std::cout << ero::format_results(rows);
    } else {
        ero::emit_results(rows, path);
        std::cerr << "wrote " << rows.size() << " row(s) to " << path << '\n';
    }
}

int exit_code(ero::ErrorCategory category) {
    switch (category) {
        case ero::ErrorCategory::Config: return kExitConfig;
        case ero::ErrorCategory::Numerical: return kExitNumerical;
        case ero::ErrorCategory::Io: return kExitIo;
        case ero::ErrorCategory::Other: return kExitOther;
    }
    return kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Price American options by exercise rate optimization"};
    app.require_subcommand(0, 1);
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "Print the embedded preset names");

    CommonOptions opts;
    std::vector<double> strikes;
    std::vector<int> levels;

    auto* price = app.add_subcommand("price", "Run one experiment at the configured strike");
    add_common(price, opts);
    auto* sweep = app.add_subcommand("sweep", "Strike or refinement-level sweep");
    add_common(sweep, opts);
    sweep->add_option("--strikes", strikes, "Strikes (overrides 'strikes')")->delimiter(',');
    sweep->add_option("--levels", levels, "Refinement levels n (overrides 'levels')")->delimiter(',');
    auto* reference = app.add_subcommand("reference", "Tree, closed-form, European MC and Longstaff-Schwartz prices");
    add_common(reference, opts);
    auto* levelset = app.add_subcommand("levelset", "Export the optimized exercise-rate grid");
    add_common(levelset, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (list_presets) {
        for (const auto& name : ero::preset_names()) std::cout << name << '\n';
        return kExitOk;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kExitConfig;
    }

    try {
        ero::ExperimentConfig config = load_config(opts);
        const ero::RunOptions run_options{!opts.no_timing};
        if (price->parsed()) {
            config.strikes.clear();
            config.levels.clear();
            write_rows(ero::run_experiment(config, run_options), opts, config);
        } else if (sweep->parsed()) {
            if (!strikes.empty()) config.strikes = strikes;
            if (!levels.empty()) config.levels = levels;
            if (config.strikes.empty() && config.levels.empty()) {
                throw ero::ConfigError("sweep needs 'strikes' or 'levels'");
            }
            write_rows(ero::run_experiment(config, run_options), opts, config);
        } else if (reference->parsed()) {
            write_rows(ero::run_references(config, run_options), opts, config);
        } else if (levelset->parsed()) {
            const auto run = ero::run_level_set(config, run_options);
            std::string path = !opts.output.empty() ? opts.output : config.levelset.output;
            if (path.empty()) path = config.id + "_levelset.txt";
            ero::write_level_grid(run.grid, path);
            std::cerr << "wrote " << run.grid.window.nx << "x" << run.grid.window.ny << " rate grid to " << path
                      << '\n';
            std::cout << ero::format_results({run.row});
        }
    } catch (const ero::ExperimentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const ero::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ero::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOk;
}
