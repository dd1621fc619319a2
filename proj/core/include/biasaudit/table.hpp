#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace biasaudit {

// Column names and conventions used when reading a subject table.
struct SchemaConfig {
    std::string id_column = "subject_id";
    std::string dataset_column = "dataset";
    std::string age_column = "age";
    std::string sex_column = "sex";
    // Optional in the file. When absent every subject counts as a control.
    std::string diagnosis_column = "diagnosis";
    std::vector<std::string> control_values = {"CN", "HC", "control", "Control", "0"};
    std::vector<std::string> feature_prefixes = {"vol_", "thick_"};
    // Extra numeric columns kept as features regardless of prefix.
    std::vector<std::string> covariate_columns;

    // Keys: id_column, dataset_column, age_column, sex_column,
    // diagnosis_column, control_values, feature_prefixes, covariate_columns.
    // List values are comma separated. Unknown keys are a SchemaError.
    static SchemaConfig from_key_values(std::map<std::string, std::string> const& kv);
};

// Parses "key = value" lines; '#' starts a comment. Throws SchemaError on
// malformed lines.
std::map<std::string, std::string> read_key_value_file(std::filesystem::path const& path);
std::map<std::string, std::string> parse_key_values(std::string const& text);

struct Subject {
    std::string id;
    std::string dataset;
    double age = 0.0;
    int sex = 0; // 1 = male
    bool control = true;
    Eigen::VectorXd features;
};

// Immutable column store of validated subjects. Every row has a finite value
// for every feature column, a positive age, and sex in {0, 1}.
class Table {
public:
    Table() = default;
    Table(std::vector<std::string> ids,
        std::vector<std::string> datasets,
        std::vector<double> ages,
        std::vector<int> sexes,
        std::vector<std::string> feature_names,
        Eigen::MatrixXd features,
        std::optional<std::vector<std::string>> diagnoses = std::nullopt,
        std::vector<bool> control = {});

    [[nodiscard]] std::size_t rows() const { return ids_.size(); }
    [[nodiscard]] bool empty() const { return ids_.empty(); }

    [[nodiscard]] std::vector<std::string> const& ids() const { return ids_; }
    [[nodiscard]] std::vector<std::string> const& dataset_labels() const { return datasets_; }
    [[nodiscard]] std::vector<double> const& ages() const { return ages_; }
    [[nodiscard]] std::vector<int> const& sexes() const { return sexes_; }
    [[nodiscard]] std::optional<std::vector<std::string>> const& diagnoses() const { return diagnoses_; }
    [[nodiscard]] bool is_control(std::size_t row) const { return control_[row]; }
    [[nodiscard]] std::vector<std::string> const& feature_names() const { return feature_names_; }
    [[nodiscard]] Eigen::MatrixXd const& features() const { return features_; }

    [[nodiscard]] Subject subject(std::size_t row) const;

    // Sorted distinct dataset labels.
    [[nodiscard]] std::vector<std::string> distinct_datasets() const;

    // "age", "sex" or any feature column.
    [[nodiscard]] bool has_column(std::string const& name) const;
    [[nodiscard]] Eigen::VectorXd column(std::string const& name) const;
    // Columns stacked side by side, n x names.size().
    [[nodiscard]] Eigen::MatrixXd columns(std::vector<std::string> const& names) const;

    [[nodiscard]] Table subset(std::span<std::size_t const> rows) const;
    [[nodiscard]] Table controls_only() const;
    [[nodiscard]] Table only_dataset(std::string const& label) const;

    // Row-wise concatenation; feature columns must match.
    [[nodiscard]] static Table concat(Table const& a, Table const& b);

private:
    std::vector<std::string> ids_;
    std::vector<std::string> datasets_;
    std::vector<double> ages_;
    std::vector<int> sexes_;
    std::optional<std::vector<std::string>> diagnoses_;
    std::vector<bool> control_;
    std::vector<std::string> feature_names_;
    Eigen::MatrixXd features_;
};

struct RejectedRow {
    std::size_t line = 0; // 1-based line number in the file, header is line 1
    std::string subject_id;
    std::string reason;
};

struct LoadResult {
    Table table;
    std::vector<RejectedRow> rejected;
};

// Reads a comma separated subject table. Rows with missing or non-numeric
// values are rejected and reported, never imputed.
LoadResult load_csv(std::filesystem::path const& path, SchemaConfig const& schema);
LoadResult parse_csv(std::string const& text, SchemaConfig const& schema);

// Writes the table in the same schema (sex as 1/0, diagnosis if present).
// Numbers are printed with round-trip precision.
void write_csv(std::filesystem::path const& path, Table const& table, SchemaConfig const& schema = {});
std::string to_csv(Table const& table, SchemaConfig const& schema = {});

struct DatasetSummary {
    std::string dataset;
    std::size_t n = 0;
    double age_mean = 0.0;
    double age_sd = 0.0; // sample SD, 0 for a single subject
    double male_percent = 0.0;
    std::size_t n_diseased = 0;
};

std::vector<DatasetSummary> summarize(Table const& table);

struct Standardized {
    Eigen::VectorXd values;
    double mean = 0.0;
    double sd = 0.0; // population SD
};

Standardized standardize_column(std::span<double const> values);
Standardized standardize_column(Eigen::VectorXd const& values);
Eigen::VectorXd destandardize(Eigen::VectorXd const& standardized, double mean, double sd);

enum class Transform { identity, square };

struct CauseTerm {
    std::string column;
    Transform transform = Transform::identity;

    [[nodiscard]] std::string name() const;
    friend bool operator==(CauseTerm const&, CauseTerm const&) = default;
};

// The presumed causes X of a target.
struct CauseSpec {
    std::vector<CauseTerm> terms;
    bool standardize = true;

    // "age,age^2,sex". Throws SchemaError on an empty list or duplicates.
    static CauseSpec parse(std::string const& text, bool standardize = true);
    void validate() const;
    [[nodiscard]] std::vector<std::string> source_columns() const;
    [[nodiscard]] std::string to_string() const;
};

struct ColumnScale {
    double mean = 0.0;
    double sd = 1.0;
};

struct DesignMatrix {
    Eigen::MatrixXd values; // n x m
    std::vector<std::string> column_names;
    std::vector<ColumnScale> scales; // identity scales when not standardized

    [[nodiscard]] Eigen::Index n() const { return values.rows(); }
    [[nodiscard]] Eigen::Index m() const { return values.cols(); }
};

// Applies each term's transform to the raw column, then standardizes each
// resulting column on its own. Requires n >= m + 2.
DesignMatrix build_design(Table const& table, CauseSpec const& spec);

// Per-dataset train count is round(fraction * N) with a floor of one row.
// Both halves keep the input row order.
std::pair<Table, Table> stratified_split(Table const& table, double train_fraction, std::uint64_t seed);

// The row indices behind stratified_split, sorted ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(Table const& table, double train_fraction, std::uint64_t seed);

} // namespace biasaudit
