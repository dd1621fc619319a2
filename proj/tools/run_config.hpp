#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "biasaudit/forest.hpp"
#include "biasaudit/score.hpp"
#include "biasaudit/synth.hpp"
#include "biasaudit/table.hpp"

namespace biasaudit::cli {

using KeyValues = std::map<std::string, std::string>;

// Fully resolved settings for one CLI invocation. Built from the config file
// (flat key = value) with command-line flags layered on top.
struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path out;
    SchemaConfig schema;
    CauseSpec causes;
    std::vector<std::string> targets; // empty: every prefixed feature column
    ScoreConfig score;
    NameThatDatasetConfig classify;
    std::string feature_sets; // "name:col,col;name:vol_*"
    std::string confusion_feature_set;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool controls_only = true;

    // Canonical text of everything that affects results; the output
    // directory and job count are left out.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string fingerprint() const;
};

// Keys every command understands. Unknown keys are rejected with SchemaError.
RunConfig resolve_run_config(KeyValues const& kv);

// "x" -> ScoreConfig etc. helpers, exposed for tests.
bool parse_bool(std::string const& key, std::string const& value);
double parse_double(std::string const& key, std::string const& value);
long long parse_int(std::string const& key, std::string const& value);
std::vector<double> parse_double_list(std::string const& key, std::string const& value);

// Expands "age_sex:age,sex;volume:vol_*" against the table's columns. Empty
// text gives the default sets (age_sex, volume, thickness, volume_thickness),
// skipping any with no matching columns.
std::vector<FeatureSet> resolve_feature_sets(std::string const& text, Table const& table);

// Default scoring targets: feature columns matching the schema prefixes.
std::vector<std::string> default_targets(Table const& table, SchemaConfig const& schema);

struct SimulateConfig {
    std::string mode = "mixed"; // mixed | multi
    GenSpec mixed;
    MultiDatasetSpec multi;
    std::filesystem::path out;
};

SimulateConfig resolve_simulate_config(KeyValues const& kv);

} // namespace biasaudit::cli
