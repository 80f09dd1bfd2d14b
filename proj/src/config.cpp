#include "couplab/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "couplab/smooth_approx.hpp"

namespace couplab::config {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out.empty() ? std::string("experiment") : out;
}

json default_config() {
    json cfg;
    cfg["seed"] = 1;
    cfg["threads"] = 0;
    cfg["output_dir"] = ".";
    cfg["class"] = {{"kind", "ball_indicators"},
                    {"dim", 2},
                    {"radius_range", {0.05, 0.25}},
                    {"balls_inside_domain", true},
                    {"offset_range", {-1.0, 1.0}}};
    cfg["data"] = {{"distribution", "uniform_cube"}};
    cfg["net"] = {{"epsilon", 0.1}, {"pool_size", 1000}, {"probe_size", 10000}, {"max_members", 0}};
    cfg["drift"] = {{"kind", "zero"}, {"eta", 0.1}};
    cfg["population"] = {{"reference_size", 1000000}};
    cfg["rate_params"] = {{"v", 4.0},        {"A", 2.718281828459045},
                          {"b", 1.0},        {"sigma", 1.0},
                          {"q", 4.0},        {"gamma", 0.1},
                          {"eta", 0.1},      {"N_B_eta", 1}};
    cfg["experiments"] = json::array();
    return cfg;
}

void merge_defaults(json& target, const json& defaults) {
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        if (!target.contains(it.key())) {
            target[it.key()] = it.value();
        } else if (it.value().is_object() && target[it.key()].is_object()) {
            merge_defaults(target[it.key()], it.value());
        }
    }
}

FunctionClassSpec class_from_json(const json& c) {
    FunctionClassSpec cls;
    cls.kind = class_kind_from_string(c.at("kind").get<std::string>());
    cls.dim = c.at("dim").get<int>();
    if (c.contains("radius_range")) {
        cls.radius_min = c["radius_range"].at(0).get<double>();
        cls.radius_max = c["radius_range"].at(1).get<double>();
    }
    if (c.contains("offset_range")) {
        cls.offset_min = c["offset_range"].at(0).get<double>();
        cls.offset_max = c["offset_range"].at(1).get<double>();
    }
    if (c.contains("balls_inside_domain")) cls.balls_inside_domain = c["balls_inside_domain"].get<bool>();
    if (c.contains("center_lo")) cls.center_lo = c["center_lo"].get<Vec>();
    if (c.contains("center_hi")) cls.center_hi = c["center_hi"].get<Vec>();
    if (c.contains("tabulated_values"))
        cls.tabulated_values = c["tabulated_values"].get<std::vector<Vec>>();
    return cls;
}

DriftSpec drift_from_json(const json& d) {
    DriftSpec drift;
    const std::string kind = d.value("kind", "zero");
    if (kind == "zero") {
        drift.kind = DriftSpec::Kind::zero;
    } else if (kind == "tabulated") {
        drift.kind = DriftSpec::Kind::tabulated;
        drift.values = d.at("values").get<Vec>();
    } else {
        throw config_error("drift: kind must be zero or tabulated in config files");
    }
    drift.eta = d.value("eta", 0.1);
    return drift;
}

std::optional<ClassParams> rate_params_from_json(const json& cfg) {
    if (!cfg.contains("rate_params")) return std::nullopt;
    const json& r = cfg["rate_params"];
    ClassParams p;
    p.v = r.value("v", 1.0);
    p.A_const = r.value("A", 2.718281828459045);
    p.b = r.value("b", 1.0);
    p.sigma = r.value("sigma", 1.0);
    p.q = r.value("q", 4.0);
    p.gamma = r.value("gamma", 0.1);
    p.eta = r.value("eta", 0.1);
    p.N_B_eta = r.value("N_B_eta", 1);
    p.n = 1;
    return p;
}

Matrix matrix_from_json(const json& m) {
    const auto rows = m.size();
    if (rows == 0) throw config_error("comparison: empty covariance matrix");
    const auto cols = m.at(0).size();
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (m.at(i).size() != cols) throw config_error("comparison: ragged covariance matrix");
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = m.at(i).at(j).get<double>();
    }
    return out;
}

ConvexSetSpec set_from_json(const json& s) {
    ConvexSetSpec set;
    set.kind = set_kind_from_string(s.at("kind").get<std::string>());
    set.dim = s.at("dim").get<int>();
    if (s.contains("center")) set.center = s["center"].get<Vec>();
    if (s.contains("radius")) set.radius = s["radius"].get<double>();
    if (s.contains("lo")) set.lo = s["lo"].get<Vec>();
    if (s.contains("hi")) set.hi = s["hi"].get<Vec>();
    if (s.contains("normal")) set.normal = s["normal"].get<Vec>();
    if (s.contains("offset")) set.offset = s["offset"].get<double>();
    if (s.contains("normals")) set.normals = matrix_from_json(s["normals"]);
    if (s.contains("offsets")) set.offsets = s["offsets"].get<Vec>();
    return set;
}

}  // namespace

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (!cfg.is_object()) throw config_error("config root must be a JSON object");
    return cfg;
}

json normalized(const json& cfg) {
    json out = cfg;
    merge_defaults(out, default_config());
    return out;
}

std::string canonical_hash(const json& cfg) {
    const std::string bytes = normalized(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig experiment_config(const json& cfg, const json& entry, std::uint64_t seed,
                                   unsigned threads) {
    ExperimentConfig ec;
    ec.cls = class_from_json(cfg.at("class"));
    ec.data = distribution_from_string(cfg.at("data").at("distribution").get<std::string>());
    ec.drift = drift_from_json(cfg.at("drift"));
    const json& net = cfg.at("net");
    ec.net_epsilon = net.value("epsilon", 0.1);
    ec.net.pool_size = net.value("pool_size", std::size_t{1000});
    ec.net.max_members = net.value("max_members", std::size_t{0});
    ec.probe_size = net.value("probe_size", std::size_t{10000});
    ec.reference_size = cfg.at("population").value("reference_size", std::size_t{1000000});
    ec.n_grid = entry.at("n_grid").get<std::vector<long long>>();
    ec.reps_outer = entry.value("reps_outer", std::size_t{4000});
    ec.reps_inner = entry.value("reps_inner", std::size_t{4000});
    ec.seed = seed;
    ec.threads = threads;
    ec.rate_params = rate_params_from_json(cfg);
    return ec;
}

Diagnostics validate(const json& raw) {
    Diagnostics diag;
    json cfg;
    try {
        cfg = normalized(raw);
    } catch (const std::exception& e) {
        diag.errors.emplace_back(e.what());
        return diag;
    }
    auto err = [&](const std::string& m) { diag.errors.push_back(m); };
    auto warn = [&](const std::string& m) { diag.warnings.push_back(m); };

    try {
        class_from_json(cfg["class"]);
    } catch (const std::exception& e) {
        err(std::string("class: ") + e.what());
    }
    try {
        distribution_from_string(cfg["data"]["distribution"].get<std::string>());
    } catch (const std::exception& e) {
        err(std::string("data: ") + e.what());
    }
    if (cfg["net"]["epsilon"].get<double>() <= 0.0) err("net.epsilon must be positive");
    if (cfg["drift"]["eta"].get<double>() <= 0.0) err("drift.eta must be positive");

    std::optional<ClassParams> rate;
    try {
        rate = rate_params_from_json(cfg);
        if (rate) {
            ClassParams p = *rate;
            p.n = 2;
            if (!(p.gamma > 0.0 && p.gamma < 1.0)) {
                err("rate_params: gamma must lie in (0,1)");
                rate.reset();
            } else {
                p.validate();
            }
        }
    } catch (const std::exception& e) {
        err(std::string("rate_params: ") + e.what());
        rate.reset();
    }

    if (!cfg["experiments"].is_array()) {
        err("experiments must be an array");
        return diag;
    }
    std::size_t index = 0;
    for (const json& entry : cfg["experiments"]) {
        const std::string label = "experiments[" + std::to_string(index) + "]";
        ++index;
        const std::string type = entry.value("type", "");
        if (type == "marginal" || type == "conditional_multiplier" || type == "conditional_empirical") {
            if (!entry.contains("n_grid") || entry["n_grid"].empty()) {
                err(label + ": n_grid required and nonempty");
                continue;
            }
            long long prev = 0;
            for (const auto& nj : entry["n_grid"]) {
                const long long n = nj.get<long long>();
                if (n < 1) err(label + ": sample sizes must be >= 1");
                if (prev != 0 && n <= prev) err(label + ": n_grid must be strictly increasing");
                prev = n;
                if (rate) {
                    ClassParams p = *rate;
                    p.n = n;
                    const double kn = compute_Kn(p);
                    if (kn * kn * kn > static_cast<double>(n))
                        warn(label + ": K_n^3 > n at n=" + std::to_string(n) +
                             " (coupling side condition not met; results are exploratory)");
                }
            }
            if (entry.value("reps_outer", std::size_t{4000}) < 1 ||
                entry.value("reps_inner", std::size_t{4000}) < 1)
                err(label + ": reps must be >= 1");
        } else if (type == "comparison") {
            if (!entry.contains("cov_x")) err(label + ": cov_x required");
            if (!entry.contains("cov_y") && !entry.contains("perturbation_t"))
                err(label + ": cov_y or perturbation_t required");
        } else if (type == "convex") {
            if (!entry.contains("set")) {
                err(label + ": set required");
            } else {
                try {
                    set_from_json(entry["set"]).validate();
                } catch (const std::exception& e) {
                    err(label + ": " + e.what());
                }
            }
        } else if (type == "tools") {
            // no extra fields
        } else {
            err(label + ": unknown experiment type '" + type + "'");
        }
    }
    return diag;
}

std::string preset(const std::string& name) {
    json cfg = default_config();
    if (name == "remark1") {
        cfg["seed"] = 20260808;
        cfg["net"]["max_members"] = 100;
        cfg["rate_params"]["v"] = 4.0;
        cfg["experiments"] = json::array(
            {json{{"type", "marginal"},
                  {"name", "remark1_marginal"},
                  {"n_grid", {128, 2048}},
                  {"reps_outer", 4000},
                  {"reps_inner", 4000}},
             json{{"type", "conditional_multiplier"},
                  {"name", "remark1_multiplier"},
                  {"n_grid", {2048}},
                  {"reps_outer", 10},
                  {"reps_inner", 4000}},
             json{{"type", "conditional_empirical"},
                  {"name", "remark1_empirical"},
                  {"n_grid", {2048}},
                  {"reps_outer", 10},
                  {"reps_inner", 4000}}});
        return cfg.dump(2) + "\n";
    }
    if (name == "convex-halfspace") {
        cfg["seed"] = 20260809;
        cfg["data"]["distribution"] = "standard_gaussian";
        cfg["experiments"] = json::array(
            {json{{"type", "convex"},
                  {"name", "halfspace_gaussian"},
                  {"set", {{"kind", "halfspace"}, {"dim", 1}, {"normal", {1.0}}, {"offset", 0.5}}},
                  {"method", "gaussian"},
                  {"n", 1024},
                  {"reps", 40000},
                  {"sphere_net_eps", 0.02}},
             json{{"type", "convex"},
                  {"name", "ball_gaussian"},
                  {"set", {{"kind", "ball"}, {"dim", 2}, {"center", {0.0, 0.0}}, {"radius", 1.5}}},
                  {"method", "gaussian"},
                  {"n", 1024},
                  {"reps", 40000},
                  {"sphere_net_eps", 0.02}}});
        return cfg.dump(2) + "\n";
    }
    if (name == "comparison") {
        cfg["seed"] = 20260810;
        cfg["experiments"] = json::array(
            {json{{"type", "comparison"},
                  {"name", "diag_comparison"},
                  {"cov_x", {{1.0, 0.0}, {0.0, 1.0}}},
                  {"cov_y", {{1.0, 0.0}, {0.0, 1.2}}},
                  {"mean", {0.0, 0.0}},
                  {"reps", 100000}},
             json{{"type", "comparison"},
                  {"name", "perturbation_family"},
                  {"cov_x", {{1.0, 0.2}, {0.2, 1.0}}},
                  {"perturbation_entry", {0, 1}},
                  {"perturbation_t", {0.01, 0.04, 0.16}},
                  {"mean", {0.0, 0.0}},
                  {"reps", 100000}}});
        return cfg.dump(2) + "\n";
    }
    throw config_error("unknown preset: " + name +
                       " (available: remark1, convex-halfspace, comparison)");
}

namespace {

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw config_error("cannot open output file: " + path);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
};

void write_distance_csv(const std::string& path, const DistanceReport& report,
                        std::uint64_t seed, const std::string& hash) {
    CsvWriter csv(path);
    csv.row({"n", "kind", "ks", "se", "ks_median", "ks_p90", "K_n", "delta_n",
             "side_condition_ok", "slope", "net_size", "probe_size", "seed", "config_hash"});
    const std::string slope = report.fit ? fmt(report.fit->slope) : "";
    for (const auto& row : report.rows) {
        csv.row({std::to_string(row.n), to_string(row.kind), fmt(row.ks), fmt(row.mc_band),
                 fmt(row.ks_median), fmt(row.ks_p90), fmt(row.K_n), fmt(row.delta_n),
                 std::isnan(row.K_n) ? "" : (row.side_ok ? "1" : "0"), slope,
                 std::to_string(report.net_size), std::to_string(report.probe_size),
                 std::to_string(seed), hash});
    }
}

void run_comparison_entry(const json& entry, const std::string& path, std::uint64_t seed,
                          unsigned threads, const std::string& hash) {
    const Matrix covX = matrix_from_json(entry.at("cov_x"));
    const Vec mean = entry.contains("mean") ? entry["mean"].get<Vec>() : Vec(covX.rows(), 0.0);
    const std::size_t reps = entry.value("reps", std::size_t{100000});

    CsvWriter csv(path);
    csv.row({"t", "ks", "delta", "scaled_ratio", "mc_band", "p", "reps", "seed", "config_hash"});
    auto emit = [&](const std::string& t, const Matrix& covY, std::uint64_t s) {
        const ComparisonResult r = run_comparison_experiment(covX, covY, mean, reps, s, threads);
        csv.row({t, fmt(r.ks), fmt(r.delta), fmt(r.scaled_ratio), fmt(r.mc_band),
                 std::to_string(covX.rows()), std::to_string(reps), std::to_string(s), hash});
    };
    if (entry.contains("cov_y")) {
        emit("", matrix_from_json(entry["cov_y"]), seed);
    }
    if (entry.contains("perturbation_t")) {
        const auto jk = entry.at("perturbation_entry").get<std::vector<std::size_t>>();
        std::size_t index = 0;
        for (const auto& tj : entry["perturbation_t"]) {
            const double t = tj.get<double>();
            Matrix covY = covX;
            covY(jk.at(0), jk.at(1)) += t;
            if (jk.at(0) != jk.at(1)) covY(jk.at(1), jk.at(0)) += t;
            emit(fmt(t), covY, mix_seed(seed, 0x70657274ULL, index++));
        }
    }
}

void run_convex_entry(const json& entry, const std::string& path, std::uint64_t seed,
                      unsigned threads, const json& cfg, const std::string& hash) {
    const ConvexSetSpec set = set_from_json(entry.at("set"));
    const auto method = convex_method_from_string(entry.value("method", "gaussian"));
    const long long n = entry.value("n", 1024LL);
    const std::size_t reps = entry.value("reps", std::size_t{40000});
    const double eps = entry.value("sphere_net_eps", 0.02);
    const auto data = distribution_from_string(cfg.at("data").at("distribution").get<std::string>());

    const ConvexProbResult r = convex_probability(set, data, n, eps, method, reps, seed, threads);
    CsvWriter csv(path);
    csv.row({"set", "method", "n", "net_eps", "net_size", "prob", "se", "net_bias", "reps", "seed",
             "config_hash"});
    csv.row({to_string(set.kind), to_string(method), std::to_string(n), fmt(eps),
             std::to_string(r.net_size), fmt(r.prob), fmt(r.se), fmt(r.net_bias),
             std::to_string(reps), std::to_string(seed), hash});
}

void run_tools_entry(const json& entry, const std::string& path, std::uint64_t seed,
                     const std::string& hash) {
    const auto softmax_reps = entry.value("softmax_reps", std::size_t{10000});
    const auto nazarov_configs = entry.value("nazarov_configs", std::size_t{20});
    const auto nazarov_draws = entry.value("nazarov_draws", std::size_t{100000});

    CsvWriter csv(path);
    csv.row({"check", "value", "bound", "ok", "seed", "config_hash"});
    auto emit = [&](const std::string& check, double value, double bound) {
        csv.row({check, fmt(value), fmt(bound), value <= bound ? "1" : "0", std::to_string(seed),
                 hash});
    };

    // softmax sandwich: worst relative violation over random triples
    {
        auto rng = make_rng(seed, 0x746f6f6cULL, 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double worst = 0.0;
        for (std::size_t rep = 0; rep < softmax_reps; ++rep) {
            const std::size_t p = 1 + static_cast<std::size_t>(unit(rng) * 64);
            const double beta = 0.5 + 99.5 * unit(rng);
            Vec x(p), mu(p);
            for (std::size_t i = 0; i < p; ++i) {
                x[i] = 3.0 * gauss(rng);
                mu[i] = gauss(rng);
            }
            Vec shifted(p);
            double maxy = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < p; ++i) {
                shifted[i] = x[i] - mu[i];
                maxy = std::max(maxy, x[i]);
            }
            const double f = softmax(shifted, beta, mu);
            const double cap = maxy + std::log(static_cast<double>(p)) / beta;
            const double scale = std::max(1.0, std::abs(maxy));
            worst = std::max(worst, std::max(maxy - f, f - cap) / scale);
        }
        emit("softmax_sandwich_violation", worst, 1e-9);
    }

    // mollifier bounds at delta = 0.1 on A = [0,1]
    {
        const MollifiedIndicator g({{0.0, 1.0}}, 0.1);
        double worst = 0.0;
        double worst_grad = 0.0;
        Vec grid;
        for (int i = 0; i <= 1000; ++i) grid.push_back(-0.6 + 2.2 * i / 1000.0);
        for (double t : grid) {
            const double v = g(t);
            const bool in_a = t >= 0.0 && t <= 1.0;
            const bool in_a3 = t >= -0.3 && t <= 1.3;
            if (in_a) worst = std::max(worst, 1.0 - v);
            if (!in_a3) worst = std::max(worst, v);
            worst = std::max(worst, std::max(v - 1.0, -v));
        }
        emit("mollifier_sandwich_violation", worst, 1e-8);
        const auto report = derivative_bound_check(g, grid, 1e-3 / 2.0);
        worst_grad = report.max_d1_scaled;
        emit("mollifier_grad_scaled", worst_grad, 1.05);
    }

    // Nazarov density bound against MC concentration on random configurations
    for (std::size_t c = 0; c < nazarov_configs; ++c) {
        auto rng = make_rng(seed, 0x6e617aULL, c);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const std::size_t p = 1 + static_cast<std::size_t>(unit(rng) * 50);
        const auto model = random_gaussian_model(p, 0.5, 2.0, mix_seed(seed, 0x6e617a32ULL, c));
        const double eps = 0.05;
        const auto mc =
            gaussian_max_concentration(model, eps, nazarov_draws, 200, mix_seed(seed, 0x6e617a33ULL, c));
        const double bound = nazarov_density_bound(p, min_coordinate_sigma(model), eps);
        emit("nazarov_config_" + std::to_string(c), mc.value, bound + 3.0 * mc.se);
    }
}

}  // namespace

RunResult run(const json& raw, const RunOptions& opts) {
    json cfg = normalized(raw);
    Diagnostics diag = validate(cfg);
    if (!diag.ok()) {
        std::string msg = "invalid config:";
        for (const auto& e : diag.errors) msg += "\n  " + e;
        throw config_error(msg);
    }
    if (opts.seed) cfg["seed"] = *opts.seed;
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const unsigned threads = opts.threads ? *opts.threads : cfg["threads"].get<unsigned>();

    std::string out_dir = cfg["output_dir"].get<std::string>();
    if (const char* env = std::getenv("COUPLAB_OUT")) out_dir = env;
    if (opts.out_dir) out_dir = *opts.out_dir;
    fs::create_directories(out_dir);

    const std::string hash = canonical_hash(cfg);
    const std::string started = iso_now();

    RunResult result;
    std::size_t index = 0;
    for (const json& entry : cfg["experiments"]) {
        const std::string type = entry.at("type").get<std::string>();
        char prefix[16];
        std::snprintf(prefix, sizeof(prefix), "exp%02zu_", index);
        const std::string name = prefix + sanitize(entry.value("name", type)) + ".csv";
        const std::string path = (fs::path(out_dir) / name).string();
        const std::uint64_t exp_seed = mix_seed(seed, 0x657870ULL, index);  // "exp"

        if (type == "marginal") {
            const auto report =
                run_marginal_experiment(experiment_config(cfg, entry, exp_seed, threads));
            write_distance_csv(path, report, exp_seed, hash);
        } else if (type == "conditional_multiplier") {
            const auto report = run_conditional_experiment(
                experiment_config(cfg, entry, exp_seed, threads), BootstrapKind::multiplier);
            write_distance_csv(path, report, exp_seed, hash);
        } else if (type == "conditional_empirical") {
            const auto report = run_conditional_experiment(
                experiment_config(cfg, entry, exp_seed, threads), BootstrapKind::empirical);
            write_distance_csv(path, report, exp_seed, hash);
        } else if (type == "comparison") {
            run_comparison_entry(entry, path, exp_seed, threads, hash);
        } else if (type == "convex") {
            run_convex_entry(entry, path, exp_seed, threads, cfg, hash);
        } else if (type == "tools") {
            run_tools_entry(entry, path, exp_seed, hash);
        }
        result.csv_paths.push_back(path);
        ++index;
    }

    json manifest;
    manifest["config_hash"] = hash;
    manifest["seed"] = seed;
    manifest["started_at"] = started;
    manifest["finished_at"] = iso_now();
    manifest["version"] = kVersion;
    manifest["outputs"] = result.csv_paths;
    manifest["config"] = cfg;
    const std::string mpath = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream mout(mpath, std::ios::binary);
    if (!mout) throw config_error("cannot write manifest: " + mpath);
    mout << manifest.dump(2) << "\n";
    result.manifest_path = mpath;
    return result;
}

}  // namespace couplab::config
