#include "radfit/balance.hpp"

#include <algorithm>
#include <cmath>

#include "radfit/errors.hpp"

namespace radfit {

namespace {

double sq_distance(const Row& a, const Row& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

}  // namespace

BalanceResult balance_classes(const Table& rows, const std::vector<int>& labels,
                              BalanceStrategy strategy, int smote_k, std::uint64_t seed) {
    if (rows.size() != labels.size()) throw DomainError("balance_classes: row/label mismatch");
    BalanceResult result{rows, labels, false};
    if (strategy == BalanceStrategy::None) return result;

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw DataError("balance_classes: both classes must be present");
    if (pos.size() == neg.size()) return result;

    const auto& minority = pos.size() < neg.size() ? pos : neg;
    const auto& majority = pos.size() < neg.size() ? neg : pos;
    int minority_label = pos.size() < neg.size() ? 1 : 0;

    Rng rng(seed);

    if (strategy == BalanceStrategy::Undersample) {
        std::vector<std::size_t> keep(majority);
        rng.shuffle(keep);
        keep.resize(minority.size());
        std::sort(keep.begin(), keep.end());
        BalanceResult out;
        std::size_t k = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            bool is_majority = labels[i] != minority_label;
            if (is_majority) {
                if (k < keep.size() && keep[k] == i) {
                    ++k;
                } else {
                    continue;
                }
            }
            out.rows.push_back(rows[i]);
            out.labels.push_back(labels[i]);
        }
        return out;
    }

    BalanceStrategy effective = strategy;
    if (strategy == BalanceStrategy::Smote && minority.size() <= 1) {
        effective = BalanceStrategy::Oversample;
        result.smote_fallback = true;
    }

    std::size_t need = majority.size() - minority.size();
    if (effective == BalanceStrategy::Oversample) {
        for (std::size_t s = 0; s < need; ++s) {
            std::size_t i = minority[rng.uniform_index(minority.size())];
            result.rows.push_back(rows[i]);
            result.labels.push_back(minority_label);
        }
        return result;
    }

    // SMOTE
    int k = std::min<int>(smote_k, static_cast<int>(minority.size()) - 1);
    if (k < 1) k = 1;
    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    for (std::size_t a = 0; a < minority.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (b == a) continue;
            d.emplace_back(sq_distance(rows[minority[a]], rows[minority[b]]), minority[b]);
        }
        std::sort(d.begin(), d.end());
        for (int t = 0; t < k; ++t) neighbors[a].push_back(d[static_cast<std::size_t>(t)].second);
    }
    for (std::size_t s = 0; s < need; ++s) {
        std::size_t a = rng.uniform_index(minority.size());
        const Row& x = rows[minority[a]];
        const Row& nn = rows[neighbors[a][rng.uniform_index(neighbors[a].size())]];
        double u = rng.uniform();
        Row synth(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) synth[j] = x[j] + u * (nn[j] - x[j]);
        result.rows.push_back(std::move(synth));
        result.labels.push_back(minority_label);
    }
    return result;
}

}  // namespace radfit
