#include "radfit/folds.hpp"

#include <algorithm>

#include "radfit/errors.hpp"

namespace radfit {

std::vector<DeviceId> FoldPlan::train_set(int fold) const {
    if (fold < 1 || fold > fold_count) throw DomainError("FoldPlan: fold out of range");
    std::vector<DeviceId> train;
    for (int f = 1; f <= fold_count; ++f) {
        if (f == fold) continue;
        const auto& s = test_sets[static_cast<std::size_t>(f - 1)];
        train.insert(train.end(), s.begin(), s.end());
    }
    std::sort(train.begin(), train.end());
    return train;
}

std::vector<DeviceId> FoldPlan::all_devices() const {
    std::vector<DeviceId> all;
    for (const auto& s : test_sets) all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    return all;
}

FoldPlan make_device_folds(const std::vector<DeviceId>& ids) {
    if (ids.empty()) throw DomainError("make_device_folds: no devices");
    int max_index = 0;
    for (const auto& id : ids) {
        if (id.index < 1) throw DomainError("make_device_folds: device index must be >= 1");
        max_index = std::max(max_index, id.index);
    }

    FoldPlan plan;
    plan.fold_count = max_index;
    plan.test_sets.assign(static_cast<std::size_t>(max_index), {});
    for (const auto& id : ids) {
        plan.test_sets[static_cast<std::size_t>(id.index - 1)].push_back(id);
    }
    for (auto& s : plan.test_sets) std::sort(s.begin(), s.end());
    return plan;
}

}  // namespace radfit
