#pragma once

#include <cstdint>

#include "radfit/learners.hpp"

namespace radfit {

enum class BalanceStrategy { None, Oversample, Undersample, Smote };

struct BalanceResult {
    Table rows;
    std::vector<int> labels;
    /// Set when SMOTE had to fall back to plain oversampling because the
    /// minority class had a single row.
    bool smote_fallback = false;
};

/// Equalize binary class counts. Oversampling duplicates random minority
/// rows, undersampling deletes random majority rows, and SMOTE synthesizes
/// minority rows at x + u * (x_nn - x) for a random one of the k nearest
/// minority neighbors. Deterministic given seed.
BalanceResult balance_classes(const Table& rows, const std::vector<int>& labels,
                              BalanceStrategy strategy, int smote_k, std::uint64_t seed);

}  // namespace radfit
