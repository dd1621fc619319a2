#include "biasaudit/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <thread>

#include "biasaudit/errors.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit {

void ForestConfig::validate() const
{
    if (n_trees < 1 || max_features < 0 || max_depth < 0 || min_samples_split < 2 || min_samples_leaf < 1) {
        throw PreconditionError("invalid forest configuration");
    }
}

std::string ForestConfig::canonical() const
{
    return "n_trees=" + std::to_string(n_trees) + ";criterion=gini;max_features="
        + (max_features == 0 ? std::string("sqrt") : std::to_string(max_features))
        + ";max_depth=" + (max_depth == 0 ? std::string("none") : std::to_string(max_depth))
        + ";min_samples_split=" + std::to_string(min_samples_split)
        + ";min_samples_leaf=" + std::to_string(min_samples_leaf)
        + ";bootstrap=" + (bootstrap ? "true" : "false") + ";";
}

double gini(std::span<double const> class_counts)
{
    double const total = std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
    if (total <= 0.0) {
        return 0.0;
    }
    double sq = 0.0;
    for (double c : class_counts) {
        sq += (c / total) * (c / total);
    }
    return 1.0 - sq;
}

int DecisionTree::depth() const
{
    if (nodes_.empty()) {
        return 0;
    }
    int best = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        auto const& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            best = std::max(best, d);
        } else {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return best;
}

std::size_t DecisionTree::leaf_count() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](auto const& n) { return n.is_leaf(); }));
}

TreeNode const& DecisionTree::leaf_for(Eigen::Ref<Eigen::VectorXd const> const& x) const
{
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        auto const& n = nodes_[id];
        id = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes_[id];
}

int DecisionTree::predict(Eigen::Ref<Eigen::VectorXd const> const& x) const
{
    auto const& counts = leaf_for(x).class_counts;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
    std::size_t n_left = 0;
};

class TreeBuilder {
public:
    TreeBuilder(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes, ForestConfig const& cfg,
        std::uint64_t seed)
        : x_(x), labels_(labels), n_classes_(n_classes), cfg_(cfg), rng_(seed)
    {
        auto const m = static_cast<int>(x_.cols());
        max_features_ = cfg_.max_features > 0 ? std::min(cfg_.max_features, m)
                                              : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
        features_.resize(static_cast<std::size_t>(m));
        std::iota(features_.begin(), features_.end(), 0);
    }

    DecisionTree build(std::vector<std::size_t> rows)
    {
        rows_ = std::move(rows);
        struct Pending {
            int node;
            std::size_t begin;
            std::size_t end;
            int depth;
        };
        nodes_.clear();
        nodes_.emplace_back();
        std::vector<Pending> stack{{0, 0, rows_.size(), 0}};
        while (!stack.empty()) {
            auto p = stack.back();
            stack.pop_back();
            auto counts = class_counts(p.begin, p.end);
            auto const n = p.end - p.begin;
            bool const pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
            std::optional<SplitChoice> split;
            if (!pure && n >= static_cast<std::size_t>(cfg_.min_samples_split)
                && (cfg_.max_depth == 0 || p.depth < cfg_.max_depth)) {
                split = best_split(p.begin, p.end, gini(counts));
            }
            nodes_[static_cast<std::size_t>(p.node)].class_counts = std::move(counts);
            if (!split) {
                continue;
            }
            // Partition rows in place: left block keeps x <= threshold.
            auto mid = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(p.begin),
                rows_.begin() + static_cast<std::ptrdiff_t>(p.end),
                [&](std::size_t r) { return x_(static_cast<Eigen::Index>(r), split->feature) <= split->threshold; });
            auto const cut = static_cast<std::size_t>(mid - rows_.begin());
            int const left = static_cast<int>(nodes_.size());
            nodes_.emplace_back();
            int const right = static_cast<int>(nodes_.size());
            nodes_.emplace_back();
            auto& node = nodes_[static_cast<std::size_t>(p.node)];
            node.feature = split->feature;
            node.threshold = split->threshold;
            node.left = left;
            node.right = right;
            stack.push_back({right, cut, p.end, p.depth + 1});
            stack.push_back({left, p.begin, cut, p.depth + 1});
        }
        return DecisionTree(std::move(nodes_), n_classes_);
    }

private:
    std::vector<double> class_counts(std::size_t begin, std::size_t end) const
    {
        std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
        for (auto i = begin; i < end; ++i) {
            counts[static_cast<std::size_t>(labels_[rows_[i]])] += 1.0;
        }
        return counts;
    }

    // Visits features in random order until max_features non-constant ones
    // have been evaluated.
    std::optional<SplitChoice> best_split(std::size_t begin, std::size_t end, double parent_impurity)
    {
        for (std::size_t i = features_.size() - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(rng_.uniform_int(0, i));
            std::swap(features_[i], features_[j]);
        }
        auto const n = end - begin;
        std::optional<SplitChoice> best;
        int visited = 0;
        order_.assign(rows_.begin() + static_cast<std::ptrdiff_t>(begin), rows_.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<double> left(static_cast<std::size_t>(n_classes_));
        std::vector<double> right(static_cast<std::size_t>(n_classes_));
        auto const total = class_counts(begin, end);
        auto const min_leaf = static_cast<std::size_t>(cfg_.min_samples_leaf);

        for (int f : features_) {
            if (visited >= max_features_) {
                break;
            }
            auto value = [&](std::size_t r) { return x_(static_cast<Eigen::Index>(r), f); };
            std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
            if (value(order_.front()) == value(order_.back())) {
                continue;
            }
            ++visited;
            std::fill(left.begin(), left.end(), 0.0);
            right = total;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                auto const c = static_cast<std::size_t>(labels_[order_[i]]);
                left[c] += 1.0;
                right[c] -= 1.0;
                double const a = value(order_[i]);
                double const b = value(order_[i + 1]);
                auto const nl = i + 1;
                auto const nr = n - nl;
                if (a == b || nl < min_leaf || nr < min_leaf) {
                    continue;
                }
                double const imp = (static_cast<double>(nl) * gini(left) + static_cast<double>(nr) * gini(right))
                    / static_cast<double>(n);
                if (!best || imp < best->impurity) {
                    double t = 0.5 * (a + b);
                    if (t >= b) {
                        t = a;
                    }
                    best = SplitChoice{f, t, imp, nl};
                }
            }
        }
        if (best && best->impurity > parent_impurity + 1e-12) {
            return std::nullopt;
        }
        return best;
    }

    Eigen::MatrixXd const& x_;
    std::vector<int> const& labels_;
    int n_classes_;
    ForestConfig const& cfg_;
    Rng rng_;
    int max_features_ = 1;
    std::vector<int> features_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> order_;
    std::vector<TreeNode> nodes_;
};

void check_training_input(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes)
{
    if (x.rows() == 0 || labels.empty()) {
        throw PreconditionError("cannot train on empty input");
    }
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        throw DimensionError("feature rows and labels differ in length");
    }
    if (x.rows() < 2 || x.cols() < 1) {
        throw PreconditionError("training needs at least two samples and one feature");
    }
    if (n_classes < 1) {
        throw PreconditionError("need at least one class");
    }
    for (int l : labels) {
        if (l < 0 || l >= n_classes) {
            throw DimensionError("label index out of range");
        }
    }
}

} // namespace

DecisionTree train_tree_on(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes,
    std::vector<std::size_t> rows, ForestConfig const& config, std::uint64_t seed)
{
    config.validate();
    check_training_input(x, labels, n_classes);
    if (rows.empty()) {
        throw PreconditionError("cannot train on empty input");
    }
    return TreeBuilder(x, labels, n_classes, config, seed).build(std::move(rows));
}

DecisionTree train_tree(Eigen::MatrixXd const& x, std::vector<int> const& labels, int n_classes,
    ForestConfig const& config, std::uint64_t seed)
{
    std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return train_tree_on(x, labels, n_classes, std::move(rows), config, seed);
}

Forest train_forest(Eigen::MatrixXd const& x, std::vector<int> const& labels, std::vector<std::string> class_labels,
    std::vector<std::string> feature_names, ForestConfig const& config, std::uint64_t seed)
{
    config.validate();
    auto const n_classes = static_cast<int>(class_labels.size());
    check_training_input(x, labels, n_classes);
    Forest forest;
    forest.class_labels = std::move(class_labels);
    forest.feature_names = std::move(feature_names);
    forest.config = config.canonical();
    auto const n = static_cast<std::size_t>(x.rows());
    for (int t = 0; t < config.n_trees; ++t) {
        auto const tree_seed = derive_seed(seed, {static_cast<std::uint64_t>(t)});
        std::vector<std::size_t> rows(n);
        if (config.bootstrap) {
            Rng rng(derive_seed(tree_seed, {0x626f6f74ULL}));
            for (auto& r : rows) {
                r = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
            }
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        forest.trees.push_back(TreeBuilder(x, labels, n_classes, config, tree_seed).build(std::move(rows)));
    }
    return forest;
}

Prediction predict(Forest const& forest, Eigen::Ref<Eigen::VectorXd const> const& x)
{
    if (forest.trees.empty()) {
        throw PreconditionError("forest has no trees");
    }
    if (!forest.feature_names.empty() && static_cast<std::size_t>(x.size()) != forest.feature_names.size()) {
        throw DimensionError("feature dimension does not match the forest");
    }
    auto const k = static_cast<Eigen::Index>(forest.class_labels.size());
    Prediction p;
    p.votes = Eigen::VectorXd::Zero(k);
    for (auto const& tree : forest.trees) {
        p.votes(tree.predict(x)) += 1.0;
    }
    // maxCoeff returns the first maximal index, which is the tie rule.
    Eigen::Index best = 0;
    p.votes.maxCoeff(&best);
    p.label = static_cast<int>(best);
    p.votes /= static_cast<double>(forest.trees.size());
    return p;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0)
{
}

void ConfusionMatrix::add(int truth, int predicted, long count)
{
    auto const k = static_cast<int>(classes_.size());
    if (truth < 0 || truth >= k || predicted < 0 || predicted >= k) {
        throw DimensionError("confusion matrix index out of range");
    }
    counts_[static_cast<std::size_t>(truth * k + predicted)] += count;
}

void ConfusionMatrix::merge(ConfusionMatrix const& other)
{
    if (other.classes_ != classes_) {
        throw DimensionError("confusion matrices have different classes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
}

long ConfusionMatrix::at(int truth, int predicted) const
{
    return counts_[static_cast<std::size_t>(truth) * classes_.size() + static_cast<std::size_t>(predicted)];
}

long ConfusionMatrix::row_sum(int truth) const
{
    long s = 0;
    for (std::size_t j = 0; j < classes_.size(); ++j) {
        s += at(truth, static_cast<int>(j));
    }
    return s;
}

long ConfusionMatrix::total() const
{
    return std::accumulate(counts_.begin(), counts_.end(), 0L);
}

long ConfusionMatrix::diagonal() const
{
    long s = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        s += at(static_cast<int>(i), static_cast<int>(i));
    }
    return s;
}

double ConfusionMatrix::accuracy() const
{
    auto const t = total();
    return t == 0 ? 0.0 : static_cast<double>(diagonal()) / static_cast<double>(t);
}

double ConfusionMatrix::off_diagonal_fraction() const
{
    auto const t = total();
    return t == 0 ? 0.0 : static_cast<double>(t - diagonal()) / static_cast<double>(t);
}

NameThatDatasetResult name_that_dataset(Table const& input, std::vector<FeatureSet> const& feature_sets,
    NameThatDatasetConfig const& config)
{
    config.forest.validate();
    if (feature_sets.empty()) {
        throw PreconditionError("no feature sets given");
    }
    if (config.repetitions < 1) {
        throw PreconditionError("repetitions must be positive");
    }
    for (double f : config.fractions) {
        if (!(f > 0.0 && f < 1.0)) {
            throw PreconditionError("training fractions must lie in (0, 1)");
        }
    }
    if (config.fractions.empty()) {
        throw PreconditionError("no training fractions given");
    }
    Table const table = config.controls_only ? input.controls_only() : input;
    auto const classes = table.distinct_datasets();
    if (classes.size() < 2) {
        throw PreconditionError("need at least two dataset labels");
    }
    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        class_index[classes[i]] = static_cast<int>(i);
    }
    std::vector<int> labels(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        labels[i] = class_index.at(table.dataset_labels()[i]);
    }
    std::vector<Eigen::MatrixXd> matrices;
    for (auto const& fs : feature_sets) {
        if (fs.columns.empty()) {
            throw PreconditionError("feature set '" + fs.name + "' is empty");
        }
        for (auto const& c : fs.columns) {
            if (!table.has_column(c)) {
                throw SchemaError("feature set '" + fs.name + "' names unknown column '" + c + "'");
            }
        }
        matrices.push_back(table.columns(fs.columns));
    }

    auto const largest = static_cast<std::size_t>(
        std::max_element(config.fractions.begin(), config.fractions.end()) - config.fractions.begin());
    auto const n_frac = config.fractions.size();
    auto const reps = static_cast<std::size_t>(config.repetitions);

    struct Task {
        std::size_t set;
        std::size_t frac;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < feature_sets.size(); ++s) {
        for (std::size_t f = 0; f < n_frac; ++f) {
            for (std::size_t r = 0; r < reps; ++r) {
                tasks.push_back({s, f, r});
            }
        }
    }
    std::vector<double> accuracy(tasks.size(), -1.0);
    std::vector<std::optional<ConfusionMatrix>> confusion(tasks.size());
    std::vector<std::string> split_errors(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            auto const& task = tasks[i];
            std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split;
            try {
                split = stratified_split_indices(table, config.fractions[task.frac],
                    derive_seed(config.seed, {task.frac, task.rep}));
            } catch (SplitError const& e) {
                split_errors[i] = e.what();
                continue;
            }
            auto const& [train, test] = split;
            auto const& xall = matrices[task.set];
            Eigen::MatrixXd xtrain(static_cast<Eigen::Index>(train.size()), xall.cols());
            std::vector<int> ytrain(train.size());
            for (std::size_t r = 0; r < train.size(); ++r) {
                xtrain.row(static_cast<Eigen::Index>(r)) = xall.row(static_cast<Eigen::Index>(train[r]));
                ytrain[r] = labels[train[r]];
            }
            auto const forest = train_forest(xtrain, ytrain, classes, feature_sets[task.set].columns, config.forest,
                derive_seed(config.seed, {stable_hash(feature_sets[task.set].name), task.frac, task.rep}));
            ConfusionMatrix cm(classes);
            for (auto r : test) {
                Eigen::VectorXd const row = xall.row(static_cast<Eigen::Index>(r)).transpose();
                cm.add(labels[r], predict(forest, row).label);
            }
            accuracy[i] = cm.accuracy();
            if (task.frac == largest) {
                confusion[i] = std::move(cm);
            }
        }
    };
    auto const nthreads = static_cast<std::size_t>(std::max(1, config.jobs));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(nthreads, tasks.size()); ++t) {
            pool.emplace_back(worker);
        }
    }

    NameThatDatasetResult out;
    std::vector<bool> warned(n_frac, false);
    for (std::size_t s = 0; s < feature_sets.size(); ++s) {
        FeatureSetResult res{LearningCurve{feature_sets[s].name, {}}, ConfusionMatrix(classes)};
        for (std::size_t f = 0; f < n_frac; ++f) {
            std::vector<double> accs;
            for (std::size_t r = 0; r < reps; ++r) {
                auto const i = (s * n_frac + f) * reps + r;
                if (accuracy[i] < 0.0) {
                    if (!warned[f]) {
                        out.warnings.push_back("fraction " + std::to_string(config.fractions[f])
                            + " skipped: " + split_errors[i]);
                        warned[f] = true;
                    }
                    continue;
                }
                accs.push_back(accuracy[i]);
                if (confusion[i]) {
                    res.confusion.merge(*confusion[i]);
                }
            }
            if (accs.empty()) {
                continue;
            }
            LearningCurvePoint pt;
            pt.train_fraction = config.fractions[f];
            pt.repetitions = static_cast<int>(accs.size());
            pt.mean_accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
            if (accs.size() > 1) {
                double ss = 0.0;
                for (double a : accs) {
                    ss += (a - pt.mean_accuracy) * (a - pt.mean_accuracy);
                }
                pt.sd_accuracy = std::sqrt(ss / static_cast<double>(accs.size() - 1));
            }
            res.curve.points.push_back(pt);
        }
        out.feature_sets.push_back(std::move(res));
    }
    return out;
}

} // namespace biasaudit
