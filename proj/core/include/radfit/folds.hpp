#pragma once

#include <vector>

#include "radfit/types.hpp"

namespace radfit {

/// Device-number cross-validation: fold i tests every device with index i,
/// regardless of manufacturer. The test sets partition the device set.
struct FoldPlan {
    int fold_count = 0;
    std::vector<std::vector<DeviceId>> test_sets;  // test_sets[i] for fold i+1

    std::vector<DeviceId> train_set(int fold) const;  // fold is 1-based
    std::vector<DeviceId> all_devices() const;
};

FoldPlan make_device_folds(const std::vector<DeviceId>& ids);

}  // namespace radfit
