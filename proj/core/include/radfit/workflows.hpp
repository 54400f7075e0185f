#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "radfit/balance.hpp"
#include "radfit/fit.hpp"
#include "radfit/folds.hpp"
#include "radfit/learners.hpp"
#include "radfit/preprocess.hpp"

namespace radfit {

enum class LearnerKind { Logistic, Forest, Boosting };

std::string to_string(LearnerKind k);
LearnerKind learner_kind_from_string(const std::string& s);

struct LearnerHyperparams {
    double logistic_l2 = 1e-3;
    int logistic_epochs = 500;
    double logistic_step = 0.5;
    ForestOptions forest;
    BoostOptions boosting{BoostLoss::Logistic, 200, 0.1, 3, 1};
};

struct DirectRunConfig {
    LearnerKind model = LearnerKind::Boosting;
    BalanceStrategy balancing = BalanceStrategy::None;
    int smote_k = 5;
    std::uint64_t seed = 42;
    LearnerHyperparams hyper;
};

struct DeviceOutcome {
    DeviceId id;
    int fold = 0;
    DeviceStatus true_status;
    DeviceStatus predicted_status;
    bool correct = false;
};

/// Cross-validated classification results: a per-device outcome table plus
/// per-fold and per-manufacturer summaries.
struct EvaluationReport {
    std::vector<int> evaluated_folds;
    std::vector<double> fold_accuracies;  // aligned with evaluated_folds
    std::vector<int> skipped_folds;       // single-class training side
    double overall_accuracy = 0.0;
    std::vector<DeviceOutcome> per_device;
    std::map<char, double> per_manufacturer_accuracy;
    // multi-step only:
    double step1_accuracy = -1.0;
    std::vector<DeviceId> group_mispredicted;
    std::vector<DeviceId> unpredictable;
};

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
void write_fold_accuracy_csv(const std::vector<std::pair<std::string, EvaluationReport>>& reports,
                             const std::filesystem::path& path);

/// Case A: 24-fold device-number CV, balancing applied to training rows
/// only, one pass/fail prediction per device.
EvaluationReport run_direct_classification(const std::vector<PipelineRow>& rows,
                                           const DirectRunConfig& config);

enum class GroupKey { Manufacturer, Voltage };

/// Two-step prediction: first the device's group (manufacturer or bias
/// voltage) from static data with the group-identity columns removed, then
/// pass/fail trained only on the predicted group. Devices whose group was
/// mispredicted are listed but excluded from step-2 accuracy.
EvaluationReport run_multistep_classification(const std::vector<PipelineRow>& rows,
                                              GroupKey group_key, const DirectRunConfig& config);

// ------------------------------------------------------------- Case B bank

/// One gradient-boosting regressor per sampled fluence-grid index;
/// concatenating their outputs in index order recovers a stress curve.
struct CurveModelBank {
    std::vector<std::size_t> sampled_indices;
    std::vector<double> sampled_fluences;
    std::vector<BoostingModel> models;
    std::vector<std::string> predictor_columns;
};

std::vector<std::size_t> equally_spaced_indices(std::size_t grid_count, std::size_t n_samples);

/// dm must be in FluencePoints mode; train_rows select the fold's training
/// side.
CurveModelBank train_curve_model_bank(const DesignMatrix& dm,
                                      const std::vector<std::size_t>& train_rows,
                                      const BenchmarkGrid& fluence_grid,
                                      const BoostOptions& options, std::uint64_t seed);

StressTrace predict_stress_curve(const CurveModelBank& bank, const Row& predictors,
                                 double flux_ncm2s);

// -------------------------------------------------------------------- grades

struct StrictGrade {
    std::vector<double> point_errors;  // |pred - meas| / max(|meas|, 1e-12)
    double rmse = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

StrictGrade grade_strict(const std::vector<double>& predicted,
                         const std::vector<double>& measured, double point_tolerance);

struct RelaxedGrade {
    DeviceStatus predicted_status;
    DeviceStatus measured_status;
    bool agree = false;
};

RelaxedGrade grade_relaxed(const StressTrace& predicted, const StressTrace& measured,
                           double drop_fraction, int baseline_window);

struct GeneralizedGrade {
    FitResult fit;
    std::vector<DeviceStatus> statuses;  // one per predicted curve
};

/// Treat the predicted curves as measurements: derive statuses, count
/// failures, and compute cohort FIT at final_fluence (the grid end).
GeneralizedGrade grade_generalized(const std::vector<StressTrace>& predicted_curves,
                                   double flux_ncm2s, double drop_fraction, int baseline_window,
                                   double final_fluence_ncm2);

/// Strict + relaxed evaluation of one predicted curve.
struct GradeReport {
    StrictGrade strict;
    RelaxedGrade relaxed;
};

GradeReport grade_curve(const StressTrace& predicted, const StressTrace& measured,
                        double point_tolerance, double drop_fraction, int baseline_window);

}  // namespace radfit
