#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biasaudit/table.hpp"

namespace biasaudit {

// Defaults follow the usual random-forest library defaults: 100 trees, Gini,
// ceil(sqrt(m)) candidate features per split, bootstrap, unlimited depth,
// one sample per leaf.
struct ForestConfig {
    int n_trees = 100;
    int max_features = 0; // 0 means ceil(sqrt(m))
    int max_depth = 0;    // 0 means unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    bool bootstrap = true;

    void validate() const;
    [[nodiscard]] std::string canonical() const;
};

double gini(std::span<double const> class_counts);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  // x[feature] <= threshold
    int right = -1;
    std::vector<double> class_counts;

    [[nodiscard]] bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, int n_classes) : nodes_(std::move(nodes)), n_classes_(n_classes) {}

    [[nodiscard]] std::vector<TreeNode> const& nodes() const { return nodes_; }
    [[nodiscard]] int n_classes() const { return n_classes_; }
    [[nodiscard]] int depth() const;
    [[nodiscard]] std::size_t leaf_count() const;

    [[nodiscard]] TreeNode const& leaf_for(Eigen::Ref<Eigen::VectorXd const> const& x) const;
    // Majority class of the leaf, ties to the lowest class index.
    [[nodiscard]] int predict(Eigen::Ref<Eigen::VectorXd const> const& x) const;

private:
    std::vector<TreeNode> nodes_;
    int n_classes_ = 0;
};

// CART on rows of x. labels hold class indices in [0, n_classes).
DecisionTree train_tree(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes,
    ForestConfig const& config, std::uint64_t seed);

// Same as train_tree but on a multiset of row indices (bootstrap samples).
DecisionTree train_tree_on(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes,
    std::vector<std::size_t> rows, ForestConfig const& config, std::uint64_t seed);

struct Forest {
    std::vector<DecisionTree> trees;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;
    std::string config;
};

Forest train_forest(Eigen::MatrixXd const& x, std::vector<int> const& labels, std::vector<std::string> class_labels,
    std::vector<std::string> feature_names, ForestConfig const& config, std::uint64_t seed);

struct Prediction {
    int label = 0;
    Eigen::VectorXd votes; // share of trees per class, sums to 1
};

// Majority vote over trees; ties go to the lowest class index.
Prediction predict(Forest const& forest, Eigen::Ref<Eigen::VectorXd const> const& x);

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> classes);

    void add(int truth, int predicted, long count = 1);
    void merge(ConfusionMatrix const& other);

    [[nodiscard]] std::vector<std::string> const& classes() const { return classes_; }
    [[nodiscard]] long at(int truth, int predicted) const;
    [[nodiscard]] long row_sum(int truth) const;
    [[nodiscard]] long total() const;
    [[nodiscard]] long diagonal() const;
    [[nodiscard]] double accuracy() const;
    [[nodiscard]] double off_diagonal_fraction() const;

private:
    std::vector<std::string> classes_;
    std::vector<long> counts_; // row-major, rows = truth
};

struct LearningCurvePoint {
    double train_fraction = 0.0;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0; // sample SD across repetitions
    int repetitions = 0;
};

struct LearningCurve {
    std::string feature_set;
    std::vector<LearningCurvePoint> points;
};

struct FeatureSet {
    std::string name;
    std::vector<std::string> columns;
};

struct NameThatDatasetConfig {
    std::vector<double> fractions = {0.001, 0.005, 0.01, 0.05, 0.1, 0.3, 0.5, 0.7};
    int repetitions = 50;
    ForestConfig forest;
    bool controls_only = true;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct FeatureSetResult {
    LearningCurve curve;
    ConfusionMatrix confusion; // summed over repetitions at the largest fraction
};

struct NameThatDatasetResult {
    std::vector<FeatureSetResult> feature_sets;
    std::vector<std::string> warnings;
};

// For every (feature set, fraction, repetition): stratified split, train a
// forest on raw feature values, score accuracy on the held-out rows.
NameThatDatasetResult name_that_dataset(Table const& table, std::vector<FeatureSet> const& feature_sets,
    NameThatDatasetConfig const& config);

} // namespace biasaudit
