#pragma once

#include <cstdint>
#include <vector>

#include "radfit/rng.hpp"

namespace radfit {

using Row = std::vector<double>;
using Table = std::vector<Row>;

// ---------------------------------------------------------------- logistic

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2_strength = 0.0;

    double raw_score(const Row& x) const;
    double predict_probability(const Row& x) const;
    int predict(const Row& x) const { return predict_probability(x) >= 0.5 ? 1 : 0; }
};

/// L2-regularized logistic loss and its gradient at (weights, bias).
/// Exposed so the training gradient can be checked against finite
/// differences.
double logistic_loss_and_gradient(const Table& X, const std::vector<int>& y,
                                  const std::vector<double>& weights, double bias, double l2,
                                  std::vector<double>& grad_w, double& grad_b);

/// Full-batch gradient descent with step halving whenever the loss would
/// increase, so the recorded loss is non-increasing across epochs.
LogisticModel train_logistic(const Table& X, const std::vector<int>& y, double l2, int epochs,
                             double step_size, std::uint64_t seed);

// -------------------------------------------------------------------- trees

enum class TreeTask { Classify, Regress };

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf payload: class label or mean target
    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;
    int max_depth = 8;
    int min_leaf = 1;

    double predict(const Row& x) const;
};

struct CartOptions {
    TreeTask task = TreeTask::Classify;
    int max_depth = 8;
    int min_leaf = 1;
    double feature_fraction = 1.0;  // per-split feature subsampling
};

/// Greedy CART: Gini impurity (classify) or squared error (regress). Split
/// ties resolve to the lowest column index, then the lowest threshold.
TreeModel train_cart(const Table& X, const std::vector<double>& y, const CartOptions& options,
                     std::uint64_t seed = 0);

// ------------------------------------------------------------------- forest

struct ForestModel {
    std::vector<TreeModel> trees;
    std::vector<std::uint64_t> bootstrap_seeds;
    double feature_fraction = 1.0;

    /// Majority vote; ties resolve to the larger label (Fail).
    double predict(const Row& x) const;
};

struct ForestOptions {
    int n_trees = 200;
    int max_depth = 8;
    int min_leaf = 1;
    double feature_fraction = -1.0;  // < 0 means sqrt(p)/p
    bool bootstrap = true;
};

ForestModel train_random_forest(const Table& X, const std::vector<double>& y,
                                const ForestOptions& options, std::uint64_t seed);

// ----------------------------------------------------------------- boosting

enum class BoostLoss { Squared, Logistic };

/// Staged additive ensemble: raw(x) = H0 + nu * sum_i h_i(x). With logistic
/// loss the raw score maps through a sigmoid for probabilities.
struct BoostingModel {
    double initial_prediction = 0.0;
    std::vector<TreeModel> stages;
    double learning_rate = 0.1;
    BoostLoss loss = BoostLoss::Squared;
    std::vector<double> stage_losses;  // training loss after each stage

    double predict_raw(const Row& x, std::size_t n_stages) const;
    double predict_raw(const Row& x) const { return predict_raw(x, stages.size()); }
    double predict(const Row& x) const;  // value (squared) or probability (logistic)
};

struct BoostOptions {
    BoostLoss loss = BoostLoss::Squared;
    int n_stages = 200;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_leaf = 1;
};

/// Each stage fits a regression tree to the negative loss gradient at the
/// current predictions; for squared loss that is exactly the residual
/// y - H_i(x).
BoostingModel train_gradient_boosting(const Table& X, const std::vector<double>& y,
                                      const BoostOptions& options, std::uint64_t seed);

// ------------------------------------------------------------------ metrics

double accuracy_score(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace radfit
