#include "ero/experiment.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "ero/linalg.hpp"
#include "ero/presets.hpp"
#include "ero/pricing_core.hpp"
#include "ero/reference_pricers.hpp"

namespace ero {

using nlohmann::json;

namespace {

constexpr int kMaxLevel = 12;
constexpr int kMaxDegree = 12;

std::string field(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError("field '" + where + "': expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("field '" + field(where, key) + "': unknown key");
    }
}

double get_double(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("field '" + field(where, key) + "': expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("field '" + field(where, key) + "': must be finite");
    return x;
}

double require_double(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError("field '" + field(where, key) + "': required");
    return get_double(obj, where, key, 0.0);
}

long long get_integer(const json& obj, const std::string& where, const char* key, long long fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    throw ConfigError("field '" + field(where, key) + "': expected an integer");
}

std::uint64_t get_unsigned(const json& obj, const std::string& where, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError("field '" + field(where, key) + "': expected a non-negative integer");
}

std::size_t get_count(const json& obj, const std::string& where, const char* key, std::size_t fallback) {
    const long long n = get_integer(obj, where, key, static_cast<long long>(fallback));
    if (n < 0) throw ConfigError("field '" + field(where, key) + "': must be non-negative");
    return static_cast<std::size_t>(n);
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError("field '" + field(where, key) + "': expected a string");
    return v.get<std::string>();
}

std::vector<double> get_vector(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("field '" + field(where, key) + "': expected a number array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("field '" + field(where, key) + "': expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Eigen::MatrixXd get_matrix(const json& obj, const std::string& where, const char* key) {
    const auto& v = obj.at(key);
    const std::string name = field(where, key);
    if (!v.is_array() || v.empty()) throw ConfigError("field '" + name + "': expected a square matrix");
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigError("field '" + name + "': expected a square matrix");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& x = row[static_cast<std::size_t>(j)];
            if (!x.is_number()) throw ConfigError("field '" + name + "': expected numbers");
            m(i, j) = x.get<double>();
        }
    }
    return m;
}

ModelSpec parse_model(const json& j) {
    const std::string where = "model";
    if (j.is_string()) {
        const json preset = preset_document(j.get<std::string>());
        return parse_model(preset.at("model"));
    }
    if (!j.is_object()) throw ConfigError("field 'model': expected an object or a preset name");
    const std::string type = get_string(j, where, "type", "");
    if (type == "black_scholes") {
        check_keys(j, where, {"type", "rate", "dividend", "covariance", "volatility", "spot", "assets"});
        BlackScholesSpec s;
        s.rate = get_double(j, where, "rate", 0.0);
        s.dividend = get_double(j, where, "dividend", 0.0);
        s.spot = get_vector(j, where, "spot");
        const auto assets = get_count(j, where, "assets", s.spot.size());
        if (s.spot.size() == 1 && assets > 1) s.spot.assign(assets, s.spot.front());
        if (j.contains("covariance") == j.contains("volatility")) {
            throw ConfigError("field 'model': give exactly one of 'covariance' and 'volatility'");
        }
        if (j.contains("covariance")) {
            s.covariance = get_matrix(j, where, "covariance");
        } else {
            const double vol = require_double(j, where, "volatility");
            const auto d = static_cast<Eigen::Index>(s.spot.size());
            s.covariance = vol * vol * Eigen::MatrixXd::Identity(d, d);
        }
        return s;
    }
    if (type == "heston") {
        check_keys(j, where, {"type", "rate", "kappa", "theta", "xi", "correlation", "rho", "spot", "v0"});
        HestonSpec s;
        s.rate = get_double(j, where, "rate", 0.0);
        s.kappa = require_double(j, where, "kappa");
        s.theta = require_double(j, where, "theta");
        s.xi = require_double(j, where, "xi");
        s.v0 = require_double(j, where, "v0");
        s.spot = get_vector(j, where, "spot");
        if (j.contains("correlation") == j.contains("rho")) {
            throw ConfigError("field 'model': give exactly one of 'correlation' and 'rho'");
        }
        if (j.contains("correlation")) {
            s.correlation = get_matrix(j, where, "correlation");
        } else {
            if (s.spot.size() != 1) throw ConfigError("field 'model.rho': only valid for one asset");
            const double rho = require_double(j, where, "rho");
            s.correlation = Eigen::Matrix2d{{1.0, rho}, {rho, 1.0}};
        }
        return s;
    }
    if (type == "rough_bergomi") {
        check_keys(j, where, {"type", "hurst", "eta", "rho", "rate", "spot", "v0"});
        RoughBergomiSpec s;
        s.hurst = get_double(j, where, "hurst", s.hurst);
        s.eta = get_double(j, where, "eta", s.eta);
        s.rho = get_double(j, where, "rho", s.rho);
        s.rate = get_double(j, where, "rate", s.rate);
        s.spot = get_double(j, where, "spot", s.spot);
        s.v0 = get_double(j, where, "v0", s.v0);
        return s;
    }
    throw ConfigError("field 'model.type': expected black_scholes, heston or rough_bergomi");
}

PayoffSpec parse_payoff(const json& j) {
    const std::string where = "payoff";
    check_keys(j, where, {"type", "strike", "weights"});
    const std::string type = get_string(j, where, "type", "");
    const double strike = require_double(j, where, "strike");
    if (type == "put") return Put{strike};
    if (type == "max_call") return MaxCall{strike};
    if (type == "basket_put") return BasketPut{strike, get_vector(j, where, "weights")};
    throw ConfigError("field 'payoff.type': expected put, basket_put or max_call");
}

ReferenceMethod parse_reference(const json& v) {
    if (!v.is_string()) throw ConfigError("field 'references': expected method names");
    const auto name = v.get<std::string>();
    for (auto m : {ReferenceMethod::Tree, ReferenceMethod::ClosedForm, ReferenceMethod::European,
                   ReferenceMethod::LongstaffSchwartz}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("field 'references': unknown method '" + name +
                      "' (expected tree, closed_form, european or longstaff_schwartz)");
}

int parse_axis(const json& v) {
    if (v.is_string() && v.get<std::string>() == "t") return kTimeAxis;
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<int>(v.get<long long>());
    throw ConfigError("field 'levelset.axes': expected coordinate indices or \"t\"");
}

LevelSetConfig parse_levelset(const json& j) {
    const std::string where = "levelset";
    check_keys(j, where, {"axes", "t_slice", "bounds", "resolution", "pinned", "output"});
    LevelSetConfig c;
    if (j.contains("axes")) {
        const auto& axes = j.at("axes");
        if (!axes.is_array() || axes.size() != 2) throw ConfigError("field 'levelset.axes': expected two axes");
        c.axis_x = parse_axis(axes[0]);
        c.axis_y = parse_axis(axes[1]);
    }
    c.t_slice = get_double(j, where, "t_slice", c.t_slice);
    if (j.contains("bounds")) {
        const auto b = get_vector(j, where, "bounds");
        if (b.size() != 4) throw ConfigError("field 'levelset.bounds': expected [xlo, xhi, ylo, yhi]");
        c.x_lo = b[0];
        c.x_hi = b[1];
        c.y_lo = b[2];
        c.y_hi = b[3];
    }
    if (j.contains("resolution")) {
        const auto r = get_vector(j, where, "resolution");
        if (r.size() != 2 || r[0] < 1 || r[1] < 1 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1])) {
            throw ConfigError("field 'levelset.resolution': expected [nx, ny] positive integers");
        }
        c.nx = static_cast<int>(r[0]);
        c.ny = static_cast<int>(r[1]);
    }
    c.pinned = get_vector(j, where, "pinned");
    c.output = get_string(j, where, "output", "");
    return c;
}

OptimizerConfig parse_optimizer(const json& j) {
    const std::string where = "optimizer";
    check_keys(j, where, {"memory", "max_iters", "grad_tol", "c1", "c2", "test_every", "early_stop", "max_line_search"});
    OptimizerConfig c;
    c.memory = static_cast<int>(get_integer(j, where, "memory", c.memory));
    c.max_iters = static_cast<int>(get_integer(j, where, "max_iters", c.max_iters));
    c.grad_tol = get_double(j, where, "grad_tol", c.grad_tol);
    c.c1 = get_double(j, where, "c1", c.c1);
    c.c2 = get_double(j, where, "c2", c.c2);
    c.test_every = static_cast<int>(get_integer(j, where, "test_every", c.test_every));
    c.max_line_search = static_cast<int>(get_integer(j, where, "max_line_search", c.max_line_search));
    if (j.contains("early_stop")) {
        if (!j.at("early_stop").is_boolean()) throw ConfigError("field 'optimizer.early_stop': expected a boolean");
        c.early_stop = j.at("early_stop").get<bool>();
    }
    return c;
}

bool is_one_dim_black_scholes_put(const ExperimentConfig& c) {
    const auto* bs = std::get_if<BlackScholesSpec>(&c.model);
    return bs && bs->spot.size() == 1 && std::holds_alternative<Put>(c.payoff) && c.lags.lags.empty();
}

double seconds_since(std::chrono::steady_clock::time_point start, const RunOptions& options) {
    if (!options.timing) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> sweep_strikes(const ExperimentConfig& config) {
    return config.strikes.empty() ? std::vector<double>{strike_of(config.payoff)} : config.strikes;
}

ResultRow base_row(const ExperimentConfig& config, double strike) {
    ResultRow row;
    row.experiment_id = config.id;
    row.model = model_name(config.model);
    row.payoff = payoff_name(config.payoff);
    row.strike = strike;
    row.degree = config.degree;
    row.paths = config.sampling.train_paths;
    row.steps = config.grid.steps;
    row.seed = config.sampling.seed;
    return row;
}

/// Simulated batch in both forms: the raw model state (for payoffs) and the
/// lag-extended state that the exercise rate sees.
struct SampledBatch {
    PathBatch base;
    std::optional<PathBatch> extended;

    const PathBatch& state() const { return extended ? *extended : base; }
};

SampledBatch sample(const ExperimentConfig& config, const BatchPlan& plan) {
    PathBatch base = simulate(config.model, config.grid, plan.paths, plan.seed);
    if (config.lags.lags.empty()) return {std::move(base), std::nullopt};
    PathBatch extended = extend_with_lags(base, config.lags);
    return {std::move(base), std::move(extended)};
}

/// Moves the state storage into a standardized cloud; the raw batch stays for payoffs.
StandardizedCloud into_cloud(const BasisTransform& basis, SampledBatch& batch) {
    if (batch.extended) {
        StandardizedCloud cloud(basis, std::move(*batch.extended));
        batch.extended.reset();
        return cloud;
    }
    return StandardizedCloud(basis, batch.base);
}

}  // namespace

std::string to_string(ReferenceMethod method) {
    switch (method) {
        case ReferenceMethod::Tree: return "tree";
        case ReferenceMethod::ClosedForm: return "closed_form";
        case ReferenceMethod::European: return "european";
        case ReferenceMethod::LongstaffSchwartz: return "longstaff_schwartz";
    }
    return "unknown";
}

std::size_t level_paths(int level) {
    if (level < 0 || level > kMaxLevel) throw ConfigError("field 'level': must lie in [0, 12]");
    return std::size_t{200} << (2 * level);
}

int level_steps(int level) {
    if (level < 0 || level > kMaxLevel) throw ConfigError("field 'level': must lie in [0, 12]");
    return 1 << level;
}

int state_dimension(const ModelSpec& model, const LagSpec& lags) {
    const int base = asset_count(model) + (std::holds_alternative<BlackScholesSpec>(model) ? 0 : 1);
    return base * static_cast<int>(1 + lags.lags.size());
}

ExperimentConfig at_level(ExperimentConfig config, int level) {
    config.level = level;
    config.sampling.train_paths = level_paths(level);
    config.sampling.test_paths = level_paths(level);
    config.grid.steps = level_steps(level);
    return config;
}

ExperimentConfig parse_experiment_config(const json& input) {
    json document = input;
    if (document.is_object() && document.contains("preset")) {
        const auto& name = document.at("preset");
        if (!name.is_string()) throw ConfigError("field 'preset': expected a preset name");
        json merged = preset_document(name.get<std::string>());
        json patch = document;
        patch.erase("preset");
        merged.merge_patch(patch);
        document = std::move(merged);
    }
    check_keys(document, "",
               {"id", "model", "payoff", "grid", "sampling", "level", "basis", "optimizer", "lags", "strikes",
                "levels", "references", "ls_degree", "tree_levels", "levelset", "output"});
    for (const char* key : {"model", "payoff", "grid", "sampling"}) {
        if (!document.contains(key)) throw ConfigError(std::string("field '") + key + "': required");
    }

    ExperimentConfig c;
    c.id = get_string(document, "", "id", c.id);
    c.model = parse_model(document.at("model"));
    c.payoff = parse_payoff(document.at("payoff"));

    const auto& grid = document.at("grid");
    check_keys(grid, "grid", {"T", "N"});
    c.grid.expiry = require_double(grid, "grid", "T");
    c.grid.steps = static_cast<int>(get_integer(grid, "grid", "N", 0));

    const auto& sampling = document.at("sampling");
    check_keys(sampling, "sampling", {"train_paths", "test_paths", "seed"});
    c.sampling.train_paths = get_count(sampling, "sampling", "train_paths", c.sampling.train_paths);
    c.sampling.test_paths = get_count(sampling, "sampling", "test_paths", c.sampling.test_paths);
    c.sampling.seed = get_unsigned(sampling, "sampling", "seed", c.sampling.seed);

    if (document.contains("basis")) {
        const auto& basis = document.at("basis");
        check_keys(basis, "basis", {"degree"});
        c.degree = static_cast<int>(get_integer(basis, "basis", "degree", c.degree));
    }
    if (document.contains("optimizer")) c.optimizer = parse_optimizer(document.at("optimizer"));
    c.lags.lags = get_vector(document, "", "lags");
    c.strikes = get_vector(document, "", "strikes");
    for (double level : get_vector(document, "", "levels")) {
        if (level != std::floor(level)) throw ConfigError("field 'levels': expected integers");
        c.levels.push_back(static_cast<int>(level));
    }
    if (document.contains("references")) {
        const auto& refs = document.at("references");
        if (!refs.is_array()) throw ConfigError("field 'references': expected an array");
        for (const auto& r : refs) c.references.push_back(parse_reference(r));
    }
    c.ls_degree = static_cast<int>(get_integer(document, "", "ls_degree", c.ls_degree));
    c.tree_levels = static_cast<int>(get_integer(document, "", "tree_levels", c.tree_levels));
    if (document.contains("levelset")) c.levelset = parse_levelset(document.at("levelset"));
    c.output = get_string(document, "", "output", "");
    if (document.contains("level") && !document.at("level").is_null()) {
        c = at_level(std::move(c), static_cast<int>(get_integer(document, "", "level", 0)));
    }
    return c;
}

void apply_override(json& document, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &document;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("--set: empty component in key '" + key + "'");
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw ConfigError("--set: '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::vector<std::string> validate_experiment(const ExperimentConfig& c) {
    std::vector<std::string> warnings;
    try {
        warnings = validate_model(c.model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'model': ") + e.what());
    }
    try {
        validate_payoff(c.payoff, asset_count(c.model));
        for (double k : c.strikes) validate_payoff(with_strike(c.payoff, k), asset_count(c.model));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'payoff': ") + e.what());
    }
    if (!(c.grid.expiry > 0.0) || c.grid.steps < 1) {
        throw ConfigError("field 'grid': require T > 0 and N >= 1");
    }
    if (c.degree < 0 || c.degree > kMaxDegree) throw ConfigError("field 'basis.degree': must lie in [0, 12]");
    if (c.ls_degree < 0 || c.ls_degree > kMaxDegree) throw ConfigError("field 'ls_degree': must lie in [0, 12]");
    if (c.tree_levels < 1) throw ConfigError("field 'tree_levels': must be at least 1");
    try {
        validate_optimizer_config(c.optimizer);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'optimizer': ") + e.what());
    }
    try {
        snap_lags(c.lags, c.grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'lags': ") + e.what());
    }
    for (int level : c.levels) level_paths(level);

    const int size = basis_dimension(c.degree, state_dimension(c.model, c.lags));
    const auto basis_size = static_cast<std::size_t>(size);
    for (const auto& [name, paths] : {std::pair{"sampling.train_paths", c.sampling.train_paths},
                                      std::pair{"sampling.test_paths", c.sampling.test_paths}}) {
        if (paths < 1) throw ConfigError(std::string("field '") + name + "': must be positive");
        if (c.levels.empty() && paths < basis_size) {
            throw ConfigError(std::string("field '") + name + "': " + std::to_string(paths) +
                              " paths cannot determine " + std::to_string(size) + " basis functions");
        }
        if (c.levels.empty() && paths < basis_size * basis_size) {
            warnings.push_back(std::string(name) + " = " + std::to_string(paths) + " is below B^2 = " +
                               std::to_string(basis_size * basis_size) + "; expect overfitting");
        }
    }
    for (auto method : c.references) {
        if ((method == ReferenceMethod::Tree || method == ReferenceMethod::ClosedForm) &&
            !is_one_dim_black_scholes_put(c)) {
            throw ConfigError("field 'references': " + to_string(method) +
                              " needs a one-asset Black-Scholes put without lags");
        }
    }
    return warnings;
}

void rethrow_categorized(const std::string& id) {
    const std::string prefix = "experiment '" + id + "': ";
    try {
        throw;
    } catch (const ExperimentError&) {
        throw;
    } catch (const IoError& e) {
        throw ExperimentError(ErrorCategory::Io, prefix + e.what());
    } catch (const FactorizationError& e) {
        throw ExperimentError(ErrorCategory::Numerical, prefix + e.what());
    } catch (const DegenerateSampleError& e) {
        throw ExperimentError(ErrorCategory::Numerical, prefix + e.what());
    } catch (const std::invalid_argument& e) {
        throw ExperimentError(ErrorCategory::Config, prefix + e.what());
    } catch (const json::exception& e) {
        throw ExperimentError(ErrorCategory::Config, prefix + e.what());
    } catch (const std::exception& e) {
        throw ExperimentError(ErrorCategory::Other, prefix + e.what());
    }
}

std::vector<ExperimentRun> run_strikes(const ExperimentConfig& config, const RunOptions& options) {
    try {
        const auto start = std::chrono::steady_clock::now();
        validate_experiment(config);
        const TimeGrid grid = make_time_grid(config.grid.expiry, config.grid.steps);
        ExperimentConfig cfg = config;
        cfg.grid = grid;
        const auto plan = train_test_plan(cfg.sampling.train_paths, cfg.sampling.test_paths, cfg.sampling.seed);
        const double rate = risk_free_rate(cfg.model);

        SampledBatch train = sample(cfg, plan.train);
        BasisTransform basis = fit_orthonormal_basis(train.state(), cfg.degree);
        const StandardizedCloud train_cloud = into_cloud(basis, train);
        SampledBatch test = sample(cfg, plan.test);
        const StandardizedCloud test_cloud = into_cloud(basis, test);
        const double setup_time = seconds_since(start, options);

        std::vector<ExperimentRun> runs;
        for (double strike : sweep_strikes(cfg)) {
            const auto strike_start = std::chrono::steady_clock::now();
            const PayoffSpec payoff = with_strike(cfg.payoff, strike);
            const PayoffGrid train_payoffs = discounted_payoff_grid(train.base, payoff, rate);
            const PayoffGrid test_payoffs = discounted_payoff_grid(test.base, payoff, rate);
            const ExerciseRateObjective train_objective(basis, train_cloud, train_payoffs);
            const ExerciseRateObjective test_objective(basis, test_cloud, test_payoffs);

            const ValueGradientFn value_gradient = [&](const Eigen::VectorXd& c) {
                auto vg = train_objective.value_gradient(c);
                return std::pair{vg.value.mean, std::move(vg.gradient)};
            };
            const TestFn test_fn = [&](const Eigen::VectorXd& c) { return test_objective.value(c); };
            OptimReport report = maximize(value_gradient, test_fn, basis.size(), cfg.optimizer);

            ExperimentRun run;
            run.row = base_row(cfg, strike);
            const auto& chosen = report.selected();
            run.row.train_value = chosen.train_value;
            run.row.test_value = chosen.test->mean;
            run.row.test_std_error = chosen.test->std_error;
            run.row.iterations = report.iterations;
            run.row.evaluations = report.evaluations;
            run.row.stop_reason = to_string(report.stop_reason);
            run.row.wall_time_s = options.timing ? setup_time + seconds_since(strike_start, options) : 0.0;
            run.coefficients = report.coefficients;
            run.report = std::move(report);
            run.basis = basis;
            runs.push_back(std::move(run));
        }
        return runs;
    } catch (...) {
        rethrow_categorized(config.id);
    }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    std::vector<ResultRow> rows;
    const auto collect = [&](const ExperimentConfig& c) {
        for (auto& run : run_strikes(c, options)) rows.push_back(std::move(run.row));
    };
    if (config.levels.empty()) {
        collect(config);
    } else {
        for (int level : config.levels) {
            ExperimentConfig c;
            try {
                c = at_level(config, level);
            } catch (...) {
                rethrow_categorized(config.id);
            }
            c.levels.clear();
            collect(c);
        }
    }
    return rows;
}

std::vector<ResultRow> run_references(const ExperimentConfig& config, const RunOptions& options) {
    try {
        validate_experiment(config);
        if (config.references.empty()) throw ConfigError("field 'references': no reference methods configured");
        const TimeGrid grid = make_time_grid(config.grid.expiry, config.grid.steps);
        ExperimentConfig cfg = config;
        cfg.grid = grid;
        const auto plan = train_test_plan(cfg.sampling.train_paths, cfg.sampling.test_paths, cfg.sampling.seed);
        const double rate = risk_free_rate(cfg.model);

        std::optional<SampledBatch> train;
        std::optional<SampledBatch> test;
        const auto need_train = [&] {
            if (!train) train = sample(cfg, plan.train);
            return &*train;
        };
        const auto need_test = [&] {
            if (!test) test = sample(cfg, plan.test);
            return &*test;
        };

        std::vector<ResultRow> rows;
        for (double strike : sweep_strikes(cfg)) {
            const PayoffSpec payoff = with_strike(cfg.payoff, strike);
            for (auto method : cfg.references) {
                const auto start = std::chrono::steady_clock::now();
                ResultRow row = base_row(cfg, strike);
                row.experiment_id = cfg.id + ":" + to_string(method);
                row.stop_reason = "none";
                row.degree = 0;
                switch (method) {
                    case ReferenceMethod::Tree:
                    case ReferenceMethod::ClosedForm: {
                        const auto& bs = std::get<BlackScholesSpec>(cfg.model);
                        const double sigma = std::sqrt(bs.covariance(0, 0));
                        double price = 0.0;
                        if (method == ReferenceMethod::Tree) {
                            TreeConfig tc{cfg.tree_levels, OptionKind::Put, sigma, bs.rate, bs.dividend, strike,
                                          bs.spot.front(), grid.expiry};
                            price = binomial_tree_american(tc);
                            row.paths = 0;
                            row.steps = cfg.tree_levels;
                        } else {
                            price = black_scholes_european_put(sigma, bs.rate, strike, bs.spot.front(), grid.expiry,
                                                               bs.dividend);
                            row.paths = 0;
                            row.steps = 0;
                        }
                        row.train_value = price;
                        row.test_value = price;
                        break;
                    }
                    case ReferenceMethod::European: {
                        const Estimate e = european_mc(discounted_payoff_grid(need_test()->base, payoff, rate));
                        row.paths = cfg.sampling.test_paths;
                        row.train_value = e.mean;
                        row.test_value = e.mean;
                        row.test_std_error = e.std_error;
                        break;
                    }
                    case ReferenceMethod::LongstaffSchwartz: {
                        const SampledBatch* tr = need_train();
                        const SampledBatch* te = need_test();
                        const auto ls = longstaff_schwartz(tr->state(), discounted_payoff_grid(tr->base, payoff, rate),
                                                           te->state(), discounted_payoff_grid(te->base, payoff, rate),
                                                           cfg.ls_degree);
                        row.degree = cfg.ls_degree;
                        row.train_value = ls.train.mean;
                        row.test_value = ls.test.mean;
                        row.test_std_error = ls.test.std_error;
                        break;
                    }
                }
                row.wall_time_s = seconds_since(start, options);
                rows.push_back(std::move(row));
            }
        }
        return rows;
    } catch (...) {
        rethrow_categorized(config.id);
    }
}

LevelSetRun run_level_set(const ExperimentConfig& config, const RunOptions& options) {
    ExperimentConfig single = config;
    single.strikes.clear();
    auto runs = run_strikes(single, options);
    try {
        auto& run = runs.front();
        const auto& ls = config.levelset;
        std::vector<double> pinned = ls.pinned;
        if (pinned.empty()) {
            const auto start = initial_state(config.model);
            for (std::size_t j = 0; j <= config.lags.lags.size(); ++j) pinned.insert(pinned.end(), start.begin(), start.end());
        }
        GridWindow window{ls.axis_x, ls.axis_y, ls.t_slice, ls.x_lo, ls.x_hi, ls.y_lo, ls.y_hi, ls.nx, ls.ny};
        LevelGrid grid = rate_level_grid(run.coefficients, *run.basis, with_strike(config.payoff, strike_of(config.payoff)),
                                         asset_count(config.model), pinned, window);
        return {std::move(run.row), std::move(grid)};
    } catch (...) {
        rethrow_categorized(config.id);
    }
}

}  // namespace ero
