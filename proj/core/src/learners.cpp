#include "radfit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "radfit/errors.hpp"

namespace radfit {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

void check_table(const Table& X, std::size_t n_targets, const char* who) {
    if (X.empty()) throw DataError(std::string(who) + ": empty training table");
    if (X.size() != n_targets) throw DataError(std::string(who) + ": row/target count mismatch");
    std::size_t p = X.front().size();
    for (const auto& row : X) {
        if (row.size() != p) throw DataError(std::string(who) + ": ragged rows");
        for (double v : row) {
            if (!std::isfinite(v)) throw DataError(std::string(who) + ": non-finite feature value");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- logistic

double LogisticModel::raw_score(const Row& x) const {
    double z = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return z;
}

double LogisticModel::predict_probability(const Row& x) const { return sigmoid(raw_score(x)); }

double logistic_loss_and_gradient(const Table& X, const std::vector<int>& y,
                                  const std::vector<double>& weights, double bias, double l2,
                                  std::vector<double>& grad_w, double& grad_b) {
    std::size_t n = X.size();
    std::size_t p = weights.size();
    grad_w.assign(p, 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = bias;
        for (std::size_t j = 0; j < p; ++j) z += weights[j] * X[i][j];
        double pr = sigmoid(z);
        double yi = static_cast<double>(y[i]);
        // numerically stable -log likelihood
        loss += (z >= 0.0 ? std::log1p(std::exp(-z)) + (1.0 - yi) * z
                          : std::log1p(std::exp(z)) - yi * z);
        double g = pr - yi;
        for (std::size_t j = 0; j < p; ++j) grad_w[j] += g * X[i][j];
        grad_b += g;
    }
    double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    grad_b *= inv_n;
    for (std::size_t j = 0; j < p; ++j) {
        grad_w[j] = grad_w[j] * inv_n + l2 * weights[j];
        loss += 0.5 * l2 * weights[j] * weights[j];
    }
    return loss;
}

LogisticModel train_logistic(const Table& X, const std::vector<int>& y, double l2, int epochs,
                             double step_size, std::uint64_t seed) {
    (void)seed;  // training is deterministic; kept for interface symmetry
    check_table(X, y.size(), "train_logistic");
    std::size_t n = X.size();
    std::size_t p = X.front().size();

    // Standardize columns for the descent, then fold the affine transform
    // back into (weights, bias) so the model predicts on raw features.
    std::vector<double> mean(p, 0.0), scale(p, 1.0);
    for (const auto& row : X)
        for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
    for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);
    std::vector<double> var(p, 0.0);
    for (const auto& row : X)
        for (std::size_t j = 0; j < p; ++j) {
            double d = row[j] - mean[j];
            var[j] += d * d;
        }
    for (std::size_t j = 0; j < p; ++j) {
        double s = std::sqrt(var[j] / static_cast<double>(n));
        scale[j] = s > 1e-12 ? s : 1.0;
    }

    Table Z(n, Row(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) Z[i][j] = (X[i][j] - mean[j]) / scale[j];

    std::vector<double> w(p, 0.0), grad_w;
    double b = 0.0, grad_b = 0.0;
    double step = step_size;
    double loss = logistic_loss_and_gradient(Z, y, w, b, l2, grad_w, grad_b);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        while (true) {
            std::vector<double> w_try(p);
            for (std::size_t j = 0; j < p; ++j) w_try[j] = w[j] - step * grad_w[j];
            double b_try = b - step * grad_b;
            std::vector<double> gw_try;
            double gb_try = 0.0;
            double loss_try = logistic_loss_and_gradient(Z, y, w_try, b_try, l2, gw_try, gb_try);
            if (loss_try <= loss || step < 1e-14) {
                w = std::move(w_try);
                b = b_try;
                grad_w = std::move(gw_try);
                grad_b = gb_try;
                loss = loss_try;
                break;
            }
            step *= 0.5;
        }
    }

    LogisticModel model;
    model.l2_strength = l2;
    model.weights.resize(p);
    model.bias = b;
    for (std::size_t j = 0; j < p; ++j) {
        model.weights[j] = w[j] / scale[j];
        model.bias -= w[j] * mean[j] / scale[j];
    }
    return model;
}

// -------------------------------------------------------------------- trees

double TreeModel::predict(const Row& x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
        i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].value;
}

namespace {

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // impurity decrease; splits must strictly improve
};

double leaf_value_classify(const std::vector<double>& y, const std::vector<int>& idx) {
    std::map<double, int> counts;
    for (int i : idx) ++counts[y[i]];
    double best = 0.0;
    int best_count = -1;
    for (const auto& [label, count] : counts) {
        if (count > best_count || (count == best_count && label > best)) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

double leaf_value_regress(const std::vector<double>& y, const std::vector<int>& idx) {
    double s = 0.0;
    for (int i : idx) s += y[i];
    return s / static_cast<double>(idx.size());
}

double gini_from_counts(const std::vector<int>& counts, int total) {
    double g = 1.0;
    for (int c : counts) {
        double f = static_cast<double>(c) / static_cast<double>(total);
        g -= f * f;
    }
    return g;
}

class CartBuilder {
public:
    CartBuilder(const Table& X, const std::vector<double>& y, const CartOptions& opt, Rng rng)
        : X_(X), y_(y), opt_(opt), rng_(rng) {
        if (opt.task == TreeTask::Classify) {
            std::vector<double> labels(y.begin(), y.end());
            std::sort(labels.begin(), labels.end());
            labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
            for (std::size_t k = 0; k < labels.size(); ++k) label_index_[labels[k]] = static_cast<int>(k);
        }
    }

    TreeModel build() {
        TreeModel tree;
        tree.max_depth = opt_.max_depth;
        tree.min_leaf = opt_.min_leaf;
        std::vector<int> idx(X_.size());
        std::iota(idx.begin(), idx.end(), 0);
        grow(tree, idx, 0);
        return tree;
    }

private:
    int grow(TreeModel& tree, const std::vector<int>& idx, int depth) {
        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});

        bool pure = true;
        for (std::size_t i = 1; i < idx.size(); ++i) {
            if (y_[idx[i]] != y_[idx[0]]) {
                pure = false;
                break;
            }
        }
        SplitResult split;
        if (!pure && depth < opt_.max_depth &&
            idx.size() >= static_cast<std::size_t>(2 * opt_.min_leaf)) {
            split = best_split(idx);
        }
        if (!split.found) {
            tree.nodes[node_id].value = opt_.task == TreeTask::Classify
                                            ? leaf_value_classify(y_, idx)
                                            : leaf_value_regress(y_, idx);
            return node_id;
        }

        std::vector<int> left, right;
        for (int i : idx) {
            (X_[i][split.feature] < split.threshold ? left : right).push_back(i);
        }
        tree.nodes[node_id].feature = split.feature;
        tree.nodes[node_id].threshold = split.threshold;
        int l = grow(tree, left, depth + 1);
        int r = grow(tree, right, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }

    std::vector<int> candidate_features() {
        std::size_t p = X_.front().size();
        std::vector<int> features(p);
        std::iota(features.begin(), features.end(), 0);
        if (opt_.feature_fraction >= 1.0) return features;
        std::size_t k = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(opt_.feature_fraction * static_cast<double>(p))));
        rng_.shuffle(features);
        features.resize(k);
        std::sort(features.begin(), features.end());  // keep tie-break order by column index
        return features;
    }

    SplitResult best_split(const std::vector<int>& idx) {
        SplitResult best;
        for (int f : candidate_features()) {
            std::vector<std::pair<double, double>> vals;  // (feature value, target)
            vals.reserve(idx.size());
            for (int i : idx) vals.emplace_back(X_[i][f], y_[i]);
            std::sort(vals.begin(), vals.end());
            if (opt_.task == TreeTask::Regress) {
                scan_regress(vals, f, best);
            } else {
                scan_classify(vals, f, best);
            }
        }
        return best;
    }

    void scan_regress(const std::vector<std::pair<double, double>>& vals, int f,
                      SplitResult& best) {
        std::size_t n = vals.size();
        double total_sum = 0.0, total_sq = 0.0;
        for (const auto& [v, t] : vals) {
            total_sum += t;
            total_sq += t * t;
        }
        double parent_sse = total_sq - total_sum * total_sum / static_cast<double>(n);
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += vals[i].second;
            left_sq += vals[i].second * vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            std::size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<std::size_t>(opt_.min_leaf) ||
                nr < static_cast<std::size_t>(opt_.min_leaf))
                continue;
            double right_sum = total_sum - left_sum;
            double right_sq = total_sq - left_sq;
            double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                         (right_sq - right_sum * right_sum / static_cast<double>(nr));
            double gain = parent_sse - sse;
            if (gain > best.score + 1e-12 * std::max(1.0, std::fabs(best.score))) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.score = gain;
            }
        }
    }

    void scan_classify(const std::vector<std::pair<double, double>>& vals, int f,
                       SplitResult& best) {
        std::size_t n = vals.size();
        std::size_t k = label_index_.size();
        std::vector<int> total(k, 0), left(k, 0);
        for (const auto& [v, t] : vals) ++total[label_index_.at(t)];
        double parent = gini_from_counts(total, static_cast<int>(n));
        int nl = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[label_index_.at(vals[i].second)];
            ++nl;
            if (vals[i].first == vals[i + 1].first) continue;
            int nr = static_cast<int>(n) - nl;
            if (nl < opt_.min_leaf || nr < opt_.min_leaf) continue;
            std::vector<int> right(k);
            for (std::size_t c = 0; c < k; ++c) right[c] = total[c] - left[c];
            double child = (static_cast<double>(nl) * gini_from_counts(left, nl) +
                            static_cast<double>(nr) * gini_from_counts(right, nr)) /
                           static_cast<double>(n);
            double gain = parent - child;
            if (gain > best.score + 1e-12 * std::max(1.0, std::fabs(best.score))) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.score = gain;
            }
        }
    }

    const Table& X_;
    const std::vector<double>& y_;
    CartOptions opt_;
    Rng rng_;
    std::map<double, int> label_index_;
};

}  // namespace

TreeModel train_cart(const Table& X, const std::vector<double>& y, const CartOptions& options,
                     std::uint64_t seed) {
    check_table(X, y.size(), "train_cart");
    for (double t : y) {
        if (!std::isfinite(t)) throw DataError("train_cart: non-finite target");
    }
    if (X.size() < static_cast<std::size_t>(options.min_leaf))
        throw DataError("train_cart: fewer rows than min_leaf");
    CartBuilder builder(X, y, options, Rng(seed));
    return builder.build();
}

// ------------------------------------------------------------------- forest

double ForestModel::predict(const Row& x) const {
    std::map<double, int> votes;
    for (const auto& t : trees) ++votes[t.predict(x)];
    double best = 0.0;
    int best_count = -1;
    for (const auto& [label, count] : votes) {
        if (count > best_count || (count == best_count && label > best)) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

ForestModel train_random_forest(const Table& X, const std::vector<double>& y,
                                const ForestOptions& options, std::uint64_t seed) {
    check_table(X, y.size(), "train_random_forest");
    if (X.size() < 2) throw DataError("train_random_forest: needs >= 2 rows");
    if (options.n_trees < 1) throw DomainError("train_random_forest: n_trees must be >= 1");

    std::size_t p = X.front().size();
    double fraction = options.feature_fraction;
    if (fraction < 0.0) fraction = std::sqrt(static_cast<double>(p)) / static_cast<double>(p);

    ForestModel forest;
    forest.feature_fraction = fraction;
    Rng master(seed);
    for (int t = 0; t < options.n_trees; ++t) {
        std::uint64_t tree_seed = master.next_u64();
        forest.bootstrap_seeds.push_back(tree_seed);
        Rng rng(tree_seed);

        Table Xb;
        std::vector<double> yb;
        if (options.bootstrap) {
            std::size_t n = X.size();
            Xb.reserve(n);
            yb.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = rng.uniform_index(n);
                Xb.push_back(X[j]);
                yb.push_back(y[j]);
            }
        }
        CartOptions cart;
        cart.task = TreeTask::Classify;
        cart.max_depth = options.max_depth;
        cart.min_leaf = options.min_leaf;
        cart.feature_fraction = fraction;
        forest.trees.push_back(train_cart(options.bootstrap ? Xb : X,
                                          options.bootstrap ? yb : y, cart, rng.next_u64()));
    }
    return forest;
}

// ----------------------------------------------------------------- boosting

double BoostingModel::predict_raw(const Row& x, std::size_t n_stages) const {
    double z = initial_prediction;
    std::size_t m = std::min(n_stages, stages.size());
    for (std::size_t i = 0; i < m; ++i) z += learning_rate * stages[i].predict(x);
    return z;
}

double BoostingModel::predict(const Row& x) const {
    double z = predict_raw(x);
    return loss == BoostLoss::Logistic ? sigmoid(z) : z;
}

BoostingModel train_gradient_boosting(const Table& X, const std::vector<double>& y,
                                      const BoostOptions& options, std::uint64_t seed) {
    check_table(X, y.size(), "train_gradient_boosting");
    for (double t : y) {
        if (!std::isfinite(t)) throw DataError("train_gradient_boosting: non-finite target");
    }
    if (options.n_stages < 1) throw DomainError("train_gradient_boosting: n_stages must be >= 1");

    std::size_t n = X.size();
    BoostingModel model;
    model.loss = options.loss;
    model.learning_rate = options.learning_rate;

    if (options.loss == BoostLoss::Squared) {
        double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        model.initial_prediction = mean;
    } else {
        double pos = std::accumulate(y.begin(), y.end(), 0.0);
        double rate = std::clamp(pos / static_cast<double>(n), 1e-9, 1.0 - 1e-9);
        model.initial_prediction = std::log(rate / (1.0 - rate));
    }

    std::vector<double> raw(n, model.initial_prediction);
    std::vector<double> residual(n);
    Rng master(seed);
    for (int stage = 0; stage < options.n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = options.loss == BoostLoss::Squared ? y[i] - raw[i]
                                                             : y[i] - sigmoid(raw[i]);
        }
        CartOptions cart;
        cart.task = TreeTask::Regress;
        cart.max_depth = options.max_depth;
        cart.min_leaf = options.min_leaf;
        TreeModel h = train_cart(X, residual, cart, master.next_u64());
        for (std::size_t i = 0; i < n; ++i) raw[i] += options.learning_rate * h.predict(X[i]);
        model.stages.push_back(std::move(h));

        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (options.loss == BoostLoss::Squared) {
                double d = y[i] - raw[i];
                loss += d * d;
            } else {
                double z = raw[i];
                loss += z >= 0.0 ? std::log1p(std::exp(-z)) + (1.0 - y[i]) * z
                                 : std::log1p(std::exp(z)) - y[i] * z;
            }
        }
        model.stage_losses.push_back(loss / static_cast<double>(n));
    }
    return model;
}

// ------------------------------------------------------------------ metrics

double accuracy_score(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw DomainError("accuracy_score: length mismatch");
    if (predicted.empty()) throw DomainError("accuracy_score: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

}  // namespace radfit
