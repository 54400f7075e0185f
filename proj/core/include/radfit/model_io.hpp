#pragma once

#include <filesystem>

#include "radfit/workflows.hpp"

namespace radfit {

/// Model artifact files are single JSON documents with a "kind" tag.
void save_logistic_model(const LogisticModel& model, const std::filesystem::path& path);
void save_forest_model(const ForestModel& model, const std::filesystem::path& path);
void save_boosting_model(const BoostingModel& model, const std::filesystem::path& path);
void save_curve_model_bank(const CurveModelBank& bank, const std::filesystem::path& path);

std::string model_kind(const std::filesystem::path& path);
LogisticModel load_logistic_model(const std::filesystem::path& path);
ForestModel load_forest_model(const std::filesystem::path& path);
BoostingModel load_boosting_model(const std::filesystem::path& path);
CurveModelBank load_curve_model_bank(const std::filesystem::path& path);

}  // namespace radfit
