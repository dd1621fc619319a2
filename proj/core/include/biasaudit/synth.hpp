#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biasaudit/table.hpp"

namespace biasaudit {

// Mixed causal/confounded generator. alpha = 1 is pure X -> Y, alpha = 0 is
// pure X <- Z -> Y.
struct GenSpec {
    std::size_t n = 500;
    int m = 3;
    int k = 1;
    double alpha = 1.0;
    // Unset parameters are drawn from the seed as sign * U(0.5, 1.5).
    std::optional<Eigen::VectorXd> weights;         // w, length m
    std::optional<Eigen::MatrixXd> loadings;        // A, m x k
    std::optional<Eigen::VectorXd> target_loadings; // b, length k
    double noise_sd = 0.5;
    std::uint64_t seed = 0;
    std::string dataset = "synthetic";

    void validate() const;
};

// Everything needed to replay the target column from the causes.
struct GroundTruth {
    double alpha = 1.0;
    std::uint64_t seed = 0;
    std::string dataset;
    double noise_sd = 0.0;
    Eigen::VectorXd weights;
    Eigen::MatrixXd loadings; // rows normalised to unit length
    Eigen::VectorXd target_loadings;
    Eigen::MatrixXd z;          // n x k
    Eigen::VectorXd noise;      // n, already scaled by noise_sd
    std::vector<std::string> cause_columns;
    std::string target_column;
};

struct GeneratedTable {
    Table table;
    GroundTruth truth;
};

// z ~ N(0, I_k); x = sqrt(alpha) eps + sqrt(1 - alpha) A z with unit-norm rows
// of A, so every cause has unit variance; y = alpha w.x + (1 - alpha) b.z + e.
// Causes are written as x_1..x_m, the target as vol_y.
GeneratedTable gen_mixed(GenSpec const& spec);

// The target equation; gen_mixed uses it too, so replay is exact.
double target_value(Eigen::Ref<Eigen::VectorXd const> const& x, Eigen::Ref<Eigen::VectorXd const> const& z,
    double noise, GroundTruth const& truth);

// Recomputes the target column of table from its cause columns and the
// recorded latents and noise.
Eigen::VectorXd replay_target(Table const& table, GroundTruth const& truth);

struct MultiDatasetSpec {
    std::vector<double> shifts; // per dataset, in feature SD units
    std::vector<double> scales; // per dataset, empty means all 1
    std::size_t n_per_dataset = 200;
    int n_volume = 4;
    int n_thickness = 4;
    double diseased_fraction = 0.0;
    std::uint64_t seed = 0;
    std::string label_prefix = "site_";
};

// Features of dataset d are N(shift_d, scale_d^2), independently per column.
// Age ~ U(20, 80) and sex ~ Bernoulli(0.5) in every dataset. Labels are the
// prefix plus a zero-padded index.
Table gen_multidataset(MultiDatasetSpec const& spec);

// Shorthand with the defaults above.
Table gen_multidataset(std::vector<double> const& shifts, std::vector<double> const& scales,
    std::size_t n_per_dataset, std::uint64_t seed);

} // namespace biasaudit
