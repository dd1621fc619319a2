#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "biasaudit/errors.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit::cli {

namespace {

std::set<std::string> const kSchemaKeys = {"id_column", "dataset_column", "age_column", "sex_column",
    "diagnosis_column", "control_values", "feature_prefixes", "covariate_columns"};

std::set<std::string> const kRunKeys = {"input", "out", "seed", "jobs", "controls_only", "causes", "targets", "k",
    "family", "causal_family", "confounded_family", "method", "sigma_x", "sigma_w", "sigma_y", "sigma_z",
    "sigma_w_confounded", "sigma_obs", "mc_samples", "learning_rate", "max_iterations", "window", "tolerance",
    "final_elbo_samples", "fractions", "repetitions", "trees", "max_features", "max_depth", "min_samples_leaf",
    "bootstrap", "feature_sets", "confusion_feature_set"};

std::set<std::string> const kSimulateKeys = {"mode", "alpha", "n", "m", "noise_sd", "dataset_label", "datasets",
    "shift", "shifts", "scales", "rows_per_dataset", "n_volume", "n_thickness", "diseased_fraction"};

void check_known(KeyValues const& kv)
{
    for (auto const& [key, value] : kv) {
        if (kSchemaKeys.count(key) == 0 && kRunKeys.count(key) == 0 && kSimulateKeys.count(key) == 0) {
            throw SchemaError("unknown configuration key '" + key + "'");
        }
    }
}

std::string trim(std::string const& s)
{
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string const& text, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        auto t = trim(item);
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

std::string fmt_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string get(KeyValues const& kv, std::string const& key, std::string const& fallback)
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::string join(std::vector<std::string> const& items, char sep)
{
    std::string out;
    for (auto const& s : items) {
        if (!out.empty()) {
            out += sep;
        }
        out += s;
    }
    return out;
}

} // namespace

bool parse_bool(std::string const& key, std::string const& value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw SchemaError("'" + key + "' expects a boolean, got '" + value + "'");
}

double parse_double(std::string const& key, std::string const& value)
{
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
        throw SchemaError("'" + key + "' expects a number, got '" + value + "'");
    }
    return v;
}

long long parse_int(std::string const& key, std::string const& value)
{
    char* end = nullptr;
    long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw SchemaError("'" + key + "' expects an integer, got '" + value + "'");
    }
    return v;
}

std::vector<double> parse_double_list(std::string const& key, std::string const& value)
{
    std::vector<double> out;
    for (auto const& item : split(value, ',')) {
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::string RunConfig::canonical() const
{
    std::string s;
    s += "input=" + input.generic_string() + ";";
    s += "schema=" + schema.id_column + "," + schema.dataset_column + "," + schema.age_column + ","
        + schema.sex_column + "," + schema.diagnosis_column + "|" + join(schema.control_values, ',') + "|"
        + join(schema.feature_prefixes, ',') + "|" + join(schema.covariate_columns, ',') + ";";
    s += "causes=" + causes.to_string() + ";";
    s += "targets=" + join(targets, ',') + ";";
    s += score.canonical();
    s += classify.forest.canonical();
    std::string fr;
    for (double f : classify.fractions) {
        fr += fmt_real(f) + ",";
    }
    s += "fractions=" + fr + ";repetitions=" + std::to_string(classify.repetitions) + ";";
    s += "feature_sets=" + feature_sets + ";confusion_feature_set=" + confusion_feature_set + ";";
    return s;
}

std::string RunConfig::fingerprint() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(canonical())));
    return buf;
}

RunConfig resolve_run_config(KeyValues const& kv)
{
    check_known(kv);
    RunConfig cfg;
    KeyValues schema_kv;
    for (auto const& [key, value] : kv) {
        if (kSchemaKeys.count(key) != 0) {
            schema_kv[key] = value;
        }
    }
    cfg.schema = SchemaConfig::from_key_values(schema_kv);
    cfg.input = get(kv, "input", "");
    cfg.out = get(kv, "out", "");
    cfg.seed = static_cast<std::uint64_t>(parse_int("seed", get(kv, "seed", "0")));
    cfg.jobs = static_cast<int>(parse_int("jobs", get(kv, "jobs", "1")));
    if (cfg.jobs < 1) {
        throw SchemaError("'jobs' must be at least 1");
    }
    cfg.controls_only = parse_bool("controls_only", get(kv, "controls_only", "true"));
    cfg.causes = CauseSpec::parse(get(kv, "causes", "age,age^2,sex"));
    for (auto const& c : cfg.causes.source_columns()) {
        if (c != "age" && c != "sex"
            && std::find(cfg.schema.covariate_columns.begin(), cfg.schema.covariate_columns.end(), c)
                == cfg.schema.covariate_columns.end()) {
            cfg.schema.covariate_columns.push_back(c);
        }
    }
    cfg.targets = split(get(kv, "targets", ""), ',');

    auto& sc = cfg.score;
    sc.seed = cfg.seed;
    sc.jobs = cfg.jobs;
    sc.controls_only = cfg.controls_only;
    sc.confounded.k = static_cast<int>(parse_int("k", get(kv, "k", "1")));
    if (kv.count("family") != 0) {
        sc.causal_family = sc.confounded_family = parse_family(kv.at("family"));
    }
    if (kv.count("causal_family") != 0) {
        sc.causal_family = parse_family(kv.at("causal_family"));
    }
    if (kv.count("confounded_family") != 0) {
        sc.confounded_family = parse_family(kv.at("confounded_family"));
    }
    sc.causal_method = parse_method(get(kv, "method", "advi"));
    sc.causal.sigma_x = parse_double("sigma_x", get(kv, "sigma_x", "1"));
    sc.causal.sigma_w = parse_double("sigma_w", get(kv, "sigma_w", "1"));
    sc.causal.sigma_y = parse_double("sigma_y", get(kv, "sigma_y", "1"));
    sc.confounded.sigma_z = parse_double("sigma_z", get(kv, "sigma_z", "1"));
    sc.confounded.sigma_w = parse_double("sigma_w_confounded", get(kv, "sigma_w_confounded", "1"));
    sc.confounded.sigma_obs = parse_double("sigma_obs", get(kv, "sigma_obs", "1"));
    sc.causal.validate();
    sc.confounded.validate();
    auto& fit = sc.fit;
    fit.mc_samples_per_step = static_cast<int>(parse_int("mc_samples", get(kv, "mc_samples", "8")));
    fit.learning_rate = parse_double("learning_rate", get(kv, "learning_rate", "0.01"));
    fit.max_iterations = static_cast<int>(parse_int("max_iterations", get(kv, "max_iterations", "20000")));
    fit.convergence_window = static_cast<int>(parse_int("window", get(kv, "window", "200")));
    fit.relative_tolerance = parse_double("tolerance", get(kv, "tolerance", "1e-4"));
    fit.final_elbo_samples = static_cast<int>(parse_int("final_elbo_samples", get(kv, "final_elbo_samples", "2000")));
    fit.validate();

    auto& cl = cfg.classify;
    cl.seed = cfg.seed;
    cl.jobs = cfg.jobs;
    cl.controls_only = cfg.controls_only;
    if (kv.count("fractions") != 0) {
        cl.fractions = parse_double_list("fractions", kv.at("fractions"));
    }
    cl.repetitions = static_cast<int>(parse_int("repetitions", get(kv, "repetitions", "50")));
    cl.forest.n_trees = static_cast<int>(parse_int("trees", get(kv, "trees", "100")));
    cl.forest.max_features = static_cast<int>(parse_int("max_features", get(kv, "max_features", "0")));
    cl.forest.max_depth = static_cast<int>(parse_int("max_depth", get(kv, "max_depth", "0")));
    cl.forest.min_samples_leaf = static_cast<int>(parse_int("min_samples_leaf", get(kv, "min_samples_leaf", "1")));
    cl.forest.bootstrap = parse_bool("bootstrap", get(kv, "bootstrap", "true"));
    cl.forest.validate();
    cfg.feature_sets = get(kv, "feature_sets", "");
    cfg.confusion_feature_set = get(kv, "confusion_feature_set", "");
    return cfg;
}

std::vector<FeatureSet> resolve_feature_sets(std::string const& text, Table const& table)
{
    auto expand = [&](std::string const& pattern) {
        std::vector<std::string> cols;
        if (!pattern.empty() && pattern.back() == '*') {
            auto const prefix = pattern.substr(0, pattern.size() - 1);
            for (auto const& f : table.feature_names()) {
                if (f.rfind(prefix, 0) == 0) {
                    cols.push_back(f);
                }
            }
        } else {
            cols.push_back(pattern);
        }
        return cols;
    };
    std::vector<FeatureSet> sets;
    if (text.empty()) {
        sets.push_back({"age_sex", {"age", "sex"}});
        sets.push_back({"volume", expand("vol_*")});
        sets.push_back({"thickness", expand("thick_*")});
        auto both = expand("vol_*");
        auto thick = expand("thick_*");
        both.insert(both.end(), thick.begin(), thick.end());
        sets.push_back({"volume_thickness", both});
        std::vector<FeatureSet> nonempty;
        for (auto& s : sets) {
            if (!s.columns.empty()) {
                nonempty.push_back(std::move(s));
            }
        }
        // Drop the combination when it equals one of its parts.
        if (nonempty.size() >= 2 && nonempty.back().name == "volume_thickness"
            && (nonempty.back().columns == nonempty[nonempty.size() - 2].columns)) {
            nonempty.pop_back();
        }
        return nonempty;
    }
    for (auto const& part : split(text, ';')) {
        auto colon = part.find(':');
        if (colon == std::string::npos) {
            throw SchemaError("feature set '" + part + "' must look like name:col,col");
        }
        FeatureSet fs;
        fs.name = trim(part.substr(0, colon));
        for (auto const& pattern : split(part.substr(colon + 1), ',')) {
            auto cols = expand(pattern);
            fs.columns.insert(fs.columns.end(), cols.begin(), cols.end());
        }
        if (fs.name.empty() || fs.columns.empty()) {
            throw SchemaError("feature set '" + part + "' is empty");
        }
        sets.push_back(std::move(fs));
    }
    return sets;
}

std::vector<std::string> default_targets(Table const& table, SchemaConfig const& schema)
{
    std::vector<std::string> out;
    for (auto const& f : table.feature_names()) {
        bool const prefixed = std::any_of(schema.feature_prefixes.begin(), schema.feature_prefixes.end(),
            [&](auto const& p) { return f.rfind(p, 0) == 0; });
        bool const covariate = std::find(schema.covariate_columns.begin(), schema.covariate_columns.end(), f)
            != schema.covariate_columns.end();
        if (prefixed && !covariate) {
            out.push_back(f);
        }
    }
    return out;
}

SimulateConfig resolve_simulate_config(KeyValues const& kv)
{
    check_known(kv);
    SimulateConfig cfg;
    cfg.mode = get(kv, "mode", "mixed");
    cfg.out = get(kv, "out", "");
    auto const seed = static_cast<std::uint64_t>(parse_int("seed", get(kv, "seed", "0")));
    if (cfg.mode == "mixed") {
        auto& g = cfg.mixed;
        g.seed = seed;
        g.alpha = parse_double("alpha", get(kv, "alpha", "1"));
        g.n = static_cast<std::size_t>(parse_int("n", get(kv, "n", "500")));
        g.m = static_cast<int>(parse_int("m", get(kv, "m", "3")));
        g.k = static_cast<int>(parse_int("k", get(kv, "k", "1")));
        g.noise_sd = parse_double("noise_sd", get(kv, "noise_sd", "0.5"));
        g.dataset = get(kv, "dataset_label", "synthetic");
        g.validate();
    } else if (cfg.mode == "multi") {
        auto& g = cfg.multi;
        g.seed = seed;
        if (kv.count("shifts") != 0) {
            g.shifts = parse_double_list("shifts", kv.at("shifts"));
        } else {
            auto const count = parse_int("datasets", get(kv, "datasets", "15"));
            double const step = parse_double("shift", get(kv, "shift", "0"));
            for (long long d = 0; d < count; ++d) {
                g.shifts.push_back(step * static_cast<double>(d));
            }
        }
        if (kv.count("scales") != 0) {
            g.scales = parse_double_list("scales", kv.at("scales"));
        }
        g.n_per_dataset = static_cast<std::size_t>(parse_int("rows_per_dataset", get(kv, "rows_per_dataset", "200")));
        g.n_volume = static_cast<int>(parse_int("n_volume", get(kv, "n_volume", "4")));
        g.n_thickness = static_cast<int>(parse_int("n_thickness", get(kv, "n_thickness", "4")));
        g.diseased_fraction = parse_double("diseased_fraction", get(kv, "diseased_fraction", "0"));
    } else {
        throw SchemaError("'mode' must be mixed or multi");
    }
    return cfg;
}

} // namespace biasaudit::cli
