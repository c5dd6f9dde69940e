#pragma once

// Config-driven experiment runner.  A JSON document names a space, a set
// of subspaces, a starting point, and one of the alternating algorithms;
// the runner executes it and emits a CSV iteration trace plus a JSON
// summary with the limit, the fitted linear rate, and a sampled
// regularity constant.  Identical config and seed produce byte-identical
// output files.

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lqproj/alternating.hpp"
#include "lqproj/errors.hpp"
#include "lqproj/regularity.hpp"
#include "lqproj/space.hpp"
#include "lqproj/subspace.hpp"

namespace lqproj {

enum class Algorithm { alternate_bregman, alternate_residual, cyclic_residual };

struct NamedSubspace {
    std::string name;
    std::vector<std::vector<double>> rows;
};

struct ExperimentConfig {
    int n = 0;
    double q = 2.0;
    double p = 2.0;
    std::vector<NamedSubspace> subspaces; // declaration order
    std::vector<std::string> use;         // names, in application order
    std::optional<std::vector<double>> x0;
    Algorithm algorithm = Algorithm::alternate_bregman;
    ResidualEngine engine = ResidualEngine::direct;
    StopRule stop;
    unsigned long long seed = 0;
    std::string output; // file path prefix; required only for file output
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& msg) {
    throw ConfigParseError("experiment config: " + msg);
}

} // namespace detail

// Parse and validate a config document.  Any structural or semantic
// problem raises ConfigParseError; nothing is executed here.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
    using njson = nlohmann::ordered_json;
    njson doc;
    try {
        doc = njson::parse(text);
    } catch (const njson::exception& e) {
        detail::config_fail(e.what());
    }
    if (!doc.is_object()) detail::config_fail("top level must be an object");
    for (const auto& [key, _] : doc.items()) {
        static const char* known[] = {"space", "subspaces", "use",  "x0",
                                      "algorithm", "engine", "stop", "seed",
                                      "output"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) detail::config_fail("unknown key '" + key + "'");
    }

    ExperimentConfig cfg;
    if (!doc.contains("space") || !doc["space"].is_object())
        detail::config_fail("missing 'space' object");
    const njson& sp = doc["space"];
    if (!sp.contains("n") || !sp["n"].is_number_integer())
        detail::config_fail("space.n must be an integer");
    cfg.n = sp["n"].get<int>();
    if (cfg.n < 1) detail::config_fail("space.n must be positive");
    for (const char* key : {"q", "p"}) {
        if (!sp.contains(key) || !sp[key].is_number())
            detail::config_fail(std::string("space.") + key +
                                " must be a number");
        double v = sp[key].get<double>();
        if (!(v > 1.0))
            detail::config_fail(std::string("space.") + key +
                                " must exceed 1");
        (key[0] == 'q' ? cfg.q : cfg.p) = v;
    }

    if (!doc.contains("subspaces") || !doc["subspaces"].is_object() ||
        doc["subspaces"].empty())
        detail::config_fail("missing non-empty 'subspaces' object");
    for (const auto& [name, rows] : doc["subspaces"].items()) {
        NamedSubspace sub;
        sub.name = name;
        if (!rows.is_array() || rows.empty())
            detail::config_fail("subspace '" + name +
                                "' must be a non-empty array of rows");
        for (const njson& row : rows) {
            if (!row.is_array() || row.size() != static_cast<size_t>(cfg.n))
                detail::config_fail("subspace '" + name +
                                    "' rows must have length n");
            std::vector<double> r;
            for (const njson& v : row) {
                if (!v.is_number())
                    detail::config_fail("subspace '" + name +
                                        "' entries must be numbers");
                r.push_back(v.get<double>());
            }
            sub.rows.push_back(std::move(r));
        }
        cfg.subspaces.push_back(std::move(sub));
    }

    if (doc.contains("use")) {
        if (!doc["use"].is_array())
            detail::config_fail("'use' must be an array of subspace names");
        for (const njson& v : doc["use"]) {
            if (!v.is_string()) detail::config_fail("'use' entries must be strings");
            cfg.use.push_back(v.get<std::string>());
        }
    } else {
        for (const NamedSubspace& s : cfg.subspaces) cfg.use.push_back(s.name);
    }
    for (const std::string& name : cfg.use) {
        bool found = false;
        for (const NamedSubspace& s : cfg.subspaces)
            found = found || s.name == name;
        if (!found) detail::config_fail("unknown subspace name '" + name + "'");
    }
    if (cfg.use.size() < 2)
        detail::config_fail("need at least two subspaces to alternate");

    if (doc.contains("x0")) {
        if (!doc["x0"].is_array() ||
            doc["x0"].size() != static_cast<size_t>(cfg.n))
            detail::config_fail("'x0' must be an array of length n");
        std::vector<double> x;
        for (const njson& v : doc["x0"]) {
            if (!v.is_number()) detail::config_fail("'x0' entries must be numbers");
            x.push_back(v.get<double>());
        }
        cfg.x0 = std::move(x);
    }

    std::string algo = doc.value("algorithm", std::string("alternate_bregman"));
    if (algo == "alternate_bregman") cfg.algorithm = Algorithm::alternate_bregman;
    else if (algo == "alternate_residual") cfg.algorithm = Algorithm::alternate_residual;
    else if (algo == "cyclic_residual") cfg.algorithm = Algorithm::cyclic_residual;
    else detail::config_fail("unknown algorithm '" + algo + "'");
    if (cfg.algorithm != Algorithm::cyclic_residual && cfg.use.size() != 2)
        detail::config_fail("'" + algo + "' takes exactly two subspaces");

    std::string engine = doc.value("engine", std::string("direct"));
    if (engine == "direct") cfg.engine = ResidualEngine::direct;
    else if (engine == "dual") cfg.engine = ResidualEngine::dual;
    else detail::config_fail("unknown engine '" + engine + "'");
    if (cfg.engine == ResidualEngine::dual &&
        cfg.algorithm != Algorithm::alternate_residual)
        detail::config_fail("engine 'dual' applies only to alternate_residual");

    if (doc.contains("stop")) {
        const njson& st = doc["stop"];
        if (!st.is_object()) detail::config_fail("'stop' must be an object");
        if (st.contains("tol_step")) {
            if (!st["tol_step"].is_number() || !(st["tol_step"].get<double>() > 0.0))
                detail::config_fail("stop.tol_step must be a positive number");
            cfg.stop.tol_step = st["tol_step"].get<double>();
        }
        if (st.contains("max_iter")) {
            if (!st["max_iter"].is_number_integer() || st["max_iter"].get<int>() < 1)
                detail::config_fail("stop.max_iter must be a positive integer");
            cfg.stop.max_iter = st["max_iter"].get<int>();
        }
    }

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0)
            detail::config_fail("'seed' must be a non-negative integer");
        cfg.seed = doc["seed"].get<unsigned long long>();
    }
    if (doc.contains("output")) {
        if (!doc["output"].is_string())
            detail::config_fail("'output' must be a string");
        cfg.output = doc["output"].get<std::string>();
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::config_fail("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

struct ExperimentResult {
    SpaceConfig space;
    IterationTrace trace;
    bool rate_ok = false; // rate fit needs enough genuine decay
    RateEstimate rate;
    double kappa_hat = 1.0;
};

namespace detail {

inline constexpr int kExperimentKappaSamples = 2000;

} // namespace detail

// Run the configured algorithm and collect the trace, the fitted linear
// rate, and a sampled regularity constant for the pair the iteration
// contracts with: the subspaces themselves for Bregman alternation, their
// annihilators in the dual space for the residual methods (first two for
// the cyclic variant).
inline ExperimentResult execute_experiment(const ExperimentConfig& config) {
    ExperimentResult res{SpaceConfig(config.n, config.q, config.p),
                         IterationTrace{},
                         false,
                         RateEstimate{},
                         1.0};
    const SpaceConfig& cfg = res.space;

    std::vector<Subspace> sets;
    for (const std::string& name : config.use)
        for (const NamedSubspace& s : config.subspaces)
            if (s.name == name) sets.push_back(Subspace::from_rows(config.n, s.rows));

    Eigen::VectorXd x0(config.n);
    if (config.x0) {
        for (int i = 0; i < config.n; ++i) x0[i] = (*config.x0)[i];
    } else {
        std::mt19937_64 rng(config.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < config.n; ++i) x0[i] = gauss(rng);
    }
    PrimalVector start(x0);

    switch (config.algorithm) {
    case Algorithm::alternate_bregman:
        res.trace = alternate_bregman(start, sets[0], sets[1], cfg, config.stop);
        break;
    case Algorithm::alternate_residual:
        res.trace = alternate_residual_metric(start, sets[0], sets[1], cfg,
                                              config.stop, config.engine);
        break;
    case Algorithm::cyclic_residual:
        res.trace = alternate_residual_cyclic(start, sets, cfg, config.stop);
        break;
    }

    try {
        res.rate = estimate_linear_rate(res.trace);
        res.rate_ok = true;
    } catch (const InsufficientDecay&) {
        res.rate_ok = false;
    }

    if (config.algorithm == Algorithm::alternate_bregman) {
        res.kappa_hat = estimate_kappa(sets[0], sets[1], cfg,
                                       RegularitySampler::sphere_uniform,
                                       detail::kExperimentKappaSamples,
                                       config.seed)
                            .kappa_hat;
    } else {
        Subspace a0 = annihilator(sets[0]);
        Subspace a1 = annihilator(sets[1]);
        // a trivial annihilator makes the pair exactly regular
        if (a0.rank() == 0 || a1.rank() == 0) {
            res.kappa_hat = 1.0;
        } else {
            res.kappa_hat = estimate_kappa(a0, a1, cfg.dual(),
                                           RegularitySampler::sphere_uniform,
                                           detail::kExperimentKappaSamples,
                                           config.seed)
                                .kappa_hat;
        }
    }
    return res;
}

inline std::string summary_json(const ExperimentResult& res) {
    std::string out = "{\"limit\": [";
    for (int i = 0; i < res.trace.limit.size(); ++i) {
        if (i) out += ", ";
        detail::json_number(out, res.trace.limit.coords[i]);
    }
    out += "], \"rate\": ";
    if (res.rate_ok) {
        out += "{\"q_hat\": ";
        detail::json_number(out, res.rate.q_hat);
        out += ", \"C_hat\": ";
        detail::json_number(out, res.rate.C_hat);
        out += ", \"r_squared\": ";
        detail::json_number(out, res.rate.r_squared);
        out += "}";
    } else {
        out += "null";
    }
    out += ", \"kappa_hat\": ";
    detail::json_number(out, res.kappa_hat);
    out += ", \"iterations\": " +
           std::to_string(res.trace.iterates.size() - 1);
    out += ", \"stop_reason\": \"";
    out += to_string(res.trace.stop_reason);
    out += "\"}";
    return out;
}

// Execute and write <output>_trace.csv and <output>_summary.json.
// Returns 0 when the iteration genuinely converged, 1 otherwise.
inline int run_experiment(const ExperimentConfig& config) {
    if (config.output.empty())
        detail::config_fail("'output' prefix is required to run");
    ExperimentResult res = execute_experiment(config);

    std::filesystem::path prefix(config.output);
    if (prefix.has_parent_path())
        std::filesystem::create_directories(prefix.parent_path());

    std::ofstream csv(config.output + "_trace.csv");
    if (!csv) throw Error("cannot write " + config.output + "_trace.csv");
    write_trace_csv(csv, res.trace, res.space);

    std::ofstream js(config.output + "_summary.json");
    if (!js) throw Error("cannot write " + config.output + "_summary.json");
    js << summary_json(res) << "\n";

    return res.trace.stop_reason == StopReason::tol_reached ? 0 : 1;
}

} // namespace lqproj
