#include "radfit/workflows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "radfit/errors.hpp"
#include "radfit/text.hpp"

namespace radfit {

std::string to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::Logistic: return "logistic";
        case LearnerKind::Forest: return "forest";
        case LearnerKind::Boosting: return "boosting";
    }
    throw DomainError("unknown learner kind");
}

LearnerKind learner_kind_from_string(const std::string& s) {
    if (s == "logistic") return LearnerKind::Logistic;
    if (s == "forest" || s == "rf") return LearnerKind::Forest;
    if (s == "boosting" || s == "gb") return LearnerKind::Boosting;
    throw ParseError("unknown learner kind: '" + s + "'");
}

namespace {

std::vector<int> train_and_predict_binary(LearnerKind kind, const Table& X_train,
                                          const std::vector<int>& y_train, const Table& X_test,
                                          const LearnerHyperparams& hyper, std::uint64_t seed) {
    std::vector<int> out;
    out.reserve(X_test.size());
    switch (kind) {
        case LearnerKind::Logistic: {
            LogisticModel m = train_logistic(X_train, y_train, hyper.logistic_l2,
                                             hyper.logistic_epochs, hyper.logistic_step, seed);
            for (const auto& x : X_test) out.push_back(m.predict(x));
            break;
        }
        case LearnerKind::Forest: {
            std::vector<double> y(y_train.begin(), y_train.end());
            ForestModel m = train_random_forest(X_train, y, hyper.forest, seed);
            for (const auto& x : X_test) out.push_back(m.predict(x) >= 0.5 ? 1 : 0);
            break;
        }
        case LearnerKind::Boosting: {
            std::vector<double> y(y_train.begin(), y_train.end());
            BoostOptions opt = hyper.boosting;
            opt.loss = BoostLoss::Logistic;
            BoostingModel m = train_gradient_boosting(X_train, y, opt, seed);
            for (const auto& x : X_test) out.push_back(m.predict(x) >= 0.5 ? 1 : 0);
            break;
        }
    }
    return out;
}

// Multiclass: native for the forest, one-vs-rest argmax otherwise.
std::vector<int> train_and_predict_multiclass(LearnerKind kind, const Table& X_train,
                                              const std::vector<int>& y_train,
                                              const Table& X_test,
                                              const LearnerHyperparams& hyper,
                                              std::uint64_t seed) {
    std::set<int> classes(y_train.begin(), y_train.end());
    std::vector<int> class_list(classes.begin(), classes.end());

    if (kind == LearnerKind::Forest) {
        std::vector<double> y(y_train.begin(), y_train.end());
        ForestModel m = train_random_forest(X_train, y, hyper.forest, seed);
        std::vector<int> out;
        out.reserve(X_test.size());
        for (const auto& x : X_test) out.push_back(static_cast<int>(std::lround(m.predict(x))));
        return out;
    }

    // one-vs-rest probability scores
    Table scores(X_test.size(), Row(class_list.size(), 0.0));
    for (std::size_t c = 0; c < class_list.size(); ++c) {
        std::vector<int> y_bin(y_train.size());
        for (std::size_t i = 0; i < y_train.size(); ++i)
            y_bin[i] = y_train[i] == class_list[c] ? 1 : 0;
        if (kind == LearnerKind::Logistic) {
            LogisticModel m = train_logistic(X_train, y_bin, hyper.logistic_l2,
                                             hyper.logistic_epochs, hyper.logistic_step, seed + c);
            for (std::size_t i = 0; i < X_test.size(); ++i)
                scores[i][c] = m.predict_probability(X_test[i]);
        } else {
            std::vector<double> y(y_bin.begin(), y_bin.end());
            BoostOptions opt = hyper.boosting;
            opt.loss = BoostLoss::Logistic;
            BoostingModel m = train_gradient_boosting(X_train, y, opt, seed + c);
            for (std::size_t i = 0; i < X_test.size(); ++i) scores[i][c] = m.predict(X_test[i]);
        }
    }
    std::vector<int> out;
    out.reserve(X_test.size());
    for (const auto& s : scores) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < s.size(); ++c) {
            if (s[c] > s[arg]) arg = c;
        }
        out.push_back(class_list[arg]);
    }
    return out;
}

void finalize_report(EvaluationReport& report) {
    if (report.per_device.empty()) {
        report.overall_accuracy = 0.0;
        return;
    }
    std::map<char, std::pair<int, int>> per_mfr;  // correct, total
    int correct = 0;
    for (const auto& d : report.per_device) {
        auto& [c, t] = per_mfr[d.id.manufacturer];
        ++t;
        if (d.correct) {
            ++c;
            ++correct;
        }
    }
    report.overall_accuracy = static_cast<double>(correct) /
                              static_cast<double>(report.per_device.size());
    for (const auto& [mfr, ct] : per_mfr) {
        report.per_manufacturer_accuracy[mfr] =
            static_cast<double>(ct.first) / static_cast<double>(ct.second);
    }
}

void require_outlier_free(const std::vector<PipelineRow>& rows, const char* who) {
    for (const auto& r : rows) {
        if (r.status.is_outlier())
            throw ContractError(std::string(who) + ": outlier device " + r.id.render() +
                                " must be excluded");
    }
}

}  // namespace

EvaluationReport run_direct_classification(const std::vector<PipelineRow>& rows,
                                           const DirectRunConfig& config) {
    require_outlier_free(rows, "run_direct_classification");
    if (rows.size() < 2) throw DataError("run_direct_classification: needs >= 2 devices");

    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::Status);
    std::vector<DeviceId> ids = dm.row_ids;
    FoldPlan plan = make_device_folds(ids);

    EvaluationReport report;
    Rng seed_rng(config.seed);
    for (int fold = 1; fold <= plan.fold_count; ++fold) {
        const auto& test_ids = plan.test_sets[static_cast<std::size_t>(fold - 1)];
        if (test_ids.empty()) continue;
        std::set<DeviceId> test_set(test_ids.begin(), test_ids.end());

        Table X_train, X_test;
        std::vector<int> y_train, y_test;
        std::vector<DeviceId> test_order;
        for (std::size_t i = 0; i < dm.row_ids.size(); ++i) {
            if (test_set.contains(dm.row_ids[i])) {
                X_test.push_back(dm.predictors[i]);
                y_test.push_back(dm.status_targets[i]);
                test_order.push_back(dm.row_ids[i]);
            } else {
                X_train.push_back(dm.predictors[i]);
                y_train.push_back(dm.status_targets[i]);
            }
        }
        std::uint64_t fold_seed = seed_rng.next_u64();
        if (X_train.empty() ||
            std::set<int>(y_train.begin(), y_train.end()).size() < 2) {
            report.skipped_folds.push_back(fold);
            continue;
        }

        // balancing strictly after the split, training rows only
        BalanceResult balanced =
            balance_classes(X_train, y_train, config.balancing, config.smote_k, fold_seed);

        std::vector<int> predictions = train_and_predict_binary(
            config.model, balanced.rows, balanced.labels, X_test, config.hyper, fold_seed);

        int correct = 0;
        for (std::size_t i = 0; i < test_order.size(); ++i) {
            DeviceOutcome o;
            o.id = test_order[i];
            o.fold = fold;
            o.true_status = y_test[i] == 1 ? DeviceStatus::fail() : DeviceStatus::pass();
            o.predicted_status = predictions[i] == 1 ? DeviceStatus::fail() : DeviceStatus::pass();
            o.correct = predictions[i] == y_test[i];
            if (o.correct) ++correct;
            report.per_device.push_back(o);
        }
        report.evaluated_folds.push_back(fold);
        report.fold_accuracies.push_back(static_cast<double>(correct) /
                                         static_cast<double>(test_order.size()));
    }
    finalize_report(report);
    return report;
}

EvaluationReport run_multistep_classification(const std::vector<PipelineRow>& rows,
                                              GroupKey group_key,
                                              const DirectRunConfig& config) {
    require_outlier_free(rows, "run_multistep_classification");
    if (rows.size() < 2) throw DataError("run_multistep_classification: needs >= 2 devices");

    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::Status);
    FoldPlan plan = make_device_folds(dm.row_ids);

    // Step-1 features exclude the columns that directly encode the group.
    std::size_t mfr_cols = dm.manufacturers.size();
    std::size_t bias_col = mfr_cols + 1;  // [one-hot | temperature | bias | ...]
    auto step1_features = [&](const Row& x) {
        Row out;
        out.reserve(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (group_key == GroupKey::Manufacturer && j < mfr_cols) continue;
            if (group_key == GroupKey::Voltage && j == bias_col) continue;
            out.push_back(x[j]);
        }
        return out;
    };

    // Group labels: manufacturer ordinal or bias-level ordinal.
    std::vector<double> bias_levels;
    for (const auto& r : rows) bias_levels.push_back(r.bias_voltage_v);
    std::sort(bias_levels.begin(), bias_levels.end());
    bias_levels.erase(std::unique(bias_levels.begin(), bias_levels.end()), bias_levels.end());

    auto group_of = [&](std::size_t row) {
        if (group_key == GroupKey::Manufacturer) {
            auto it = std::find(dm.manufacturers.begin(), dm.manufacturers.end(),
                                dm.row_ids[row].manufacturer);
            return static_cast<int>(it - dm.manufacturers.begin());
        }
        double bias = dm.predictors[row][bias_col];
        auto it = std::find(bias_levels.begin(), bias_levels.end(), bias);
        return static_cast<int>(it - bias_levels.begin());
    };

    EvaluationReport report;
    int step1_correct = 0, step1_total = 0;
    Rng seed_rng(config.seed);
    for (int fold = 1; fold <= plan.fold_count; ++fold) {
        const auto& test_ids = plan.test_sets[static_cast<std::size_t>(fold - 1)];
        if (test_ids.empty()) continue;
        std::set<DeviceId> test_set(test_ids.begin(), test_ids.end());

        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < dm.row_ids.size(); ++i)
            (test_set.contains(dm.row_ids[i]) ? test_rows : train_rows).push_back(i);
        if (train_rows.empty()) {
            report.skipped_folds.push_back(fold);
            continue;
        }
        std::uint64_t fold_seed = seed_rng.next_u64();

        Table X1_train, X1_test;
        std::vector<int> g_train;
        for (std::size_t i : train_rows) {
            X1_train.push_back(step1_features(dm.predictors[i]));
            g_train.push_back(group_of(i));
        }
        for (std::size_t i : test_rows) X1_test.push_back(step1_features(dm.predictors[i]));

        std::vector<int> g_pred = train_and_predict_multiclass(config.model, X1_train, g_train,
                                                               X1_test, config.hyper, fold_seed);

        int fold_correct = 0, fold_total = 0;
        for (std::size_t t = 0; t < test_rows.size(); ++t) {
            std::size_t row = test_rows[t];
            int true_group = group_of(row);
            ++step1_total;
            if (g_pred[t] != true_group) {
                report.group_mispredicted.push_back(dm.row_ids[row]);
                continue;
            }
            ++step1_correct;

            // Step 2: train only within the predicted group.
            Table X2_train;
            std::vector<int> y2_train;
            for (std::size_t i : train_rows) {
                if (group_of(i) != g_pred[t]) continue;
                X2_train.push_back(dm.predictors[i]);
                y2_train.push_back(dm.status_targets[i]);
            }
            if (X2_train.size() < 2) {
                report.unpredictable.push_back(dm.row_ids[row]);
                continue;
            }

            int prediction;
            std::set<int> classes(y2_train.begin(), y2_train.end());
            if (classes.size() < 2) {
                prediction = *classes.begin();  // single-class group predicts its class
            } else {
                BalanceResult balanced = balance_classes(X2_train, y2_train, config.balancing,
                                                         config.smote_k, fold_seed + t);
                prediction = train_and_predict_binary(config.model, balanced.rows,
                                                      balanced.labels, {dm.predictors[row]},
                                                      config.hyper, fold_seed + t)[0];
            }

            DeviceOutcome o;
            o.id = dm.row_ids[row];
            o.fold = fold;
            o.true_status = dm.status_targets[row] == 1 ? DeviceStatus::fail() : DeviceStatus::pass();
            o.predicted_status = prediction == 1 ? DeviceStatus::fail() : DeviceStatus::pass();
            o.correct = prediction == dm.status_targets[row];
            if (o.correct) ++fold_correct;
            ++fold_total;
            report.per_device.push_back(o);
        }
        if (fold_total > 0) {
            report.evaluated_folds.push_back(fold);
            report.fold_accuracies.push_back(static_cast<double>(fold_correct) /
                                             static_cast<double>(fold_total));
        }
    }
    report.step1_accuracy =
        step1_total > 0 ? static_cast<double>(step1_correct) / static_cast<double>(step1_total)
                        : 0.0;
    finalize_report(report);
    return report;
}

// --------------------------------------------------------------- Case B

std::vector<std::size_t> equally_spaced_indices(std::size_t grid_count, std::size_t n_samples) {
    if (n_samples < 2 || n_samples > grid_count)
        throw DomainError("equally_spaced_indices: bad sample count");
    std::vector<std::size_t> idx(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        idx[k] = k * (grid_count - 1) / (n_samples - 1);
    }
    idx.back() = grid_count - 1;
    return idx;
}

CurveModelBank train_curve_model_bank(const DesignMatrix& dm,
                                      const std::vector<std::size_t>& train_rows,
                                      const BenchmarkGrid& fluence_grid,
                                      const BoostOptions& options, std::uint64_t seed) {
    if (dm.target_mode != TargetMode::FluencePoints)
        throw ContractError("train_curve_model_bank: design matrix must be in fluence_points mode");
    if (train_rows.empty()) throw DomainError("train_curve_model_bank: empty training fold");

    CurveModelBank bank;
    bank.sampled_indices = dm.sampled_indices;
    bank.predictor_columns = dm.column_names;
    for (std::size_t idx : dm.sampled_indices) {
        if (idx >= fluence_grid.count())
            throw DomainError("train_curve_model_bank: sampled index beyond grid");
        bank.sampled_fluences.push_back(fluence_grid.positions[idx]);
    }

    Table X;
    for (std::size_t i : train_rows) X.push_back(dm.predictors.at(i));

    BoostOptions opt = options;
    opt.loss = BoostLoss::Squared;
    Rng seed_rng(seed);
    for (std::size_t k = 0; k < dm.sampled_indices.size(); ++k) {
        std::vector<double> y;
        y.reserve(train_rows.size());
        for (std::size_t i : train_rows) y.push_back(dm.current_targets.at(i)[k]);
        bank.models.push_back(train_gradient_boosting(X, y, opt, seed_rng.next_u64()));
    }
    return bank;
}

StressTrace predict_stress_curve(const CurveModelBank& bank, const Row& predictors,
                                 double flux_ncm2s) {
    if (predictors.size() != bank.predictor_columns.size())
        throw ContractError("predict_stress_curve: predictor schema mismatch");
    StressTrace trace;
    trace.flux_ncm2s = flux_ncm2s;
    for (std::size_t k = 0; k < bank.models.size(); ++k) {
        trace.points.push_back({bank.sampled_fluences[k], bank.models[k].predict(predictors)});
    }
    return trace;
}

// ---------------------------------------------------------------- grading

StrictGrade grade_strict(const std::vector<double>& predicted,
                         const std::vector<double>& measured, double point_tolerance) {
    if (predicted.size() != measured.size())
        throw ContractError("grade_strict: length mismatch");
    StrictGrade g;
    g.tolerance = point_tolerance;
    double sse = 0.0;
    g.pass = true;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        double err = std::fabs(predicted[i] - measured[i]) /
                     std::max(std::fabs(measured[i]), 1e-12);
        g.point_errors.push_back(err);
        if (err > point_tolerance) g.pass = false;
        double d = predicted[i] - measured[i];
        sse += d * d;
    }
    g.rmse = predicted.empty() ? 0.0 : std::sqrt(sse / static_cast<double>(predicted.size()));
    return g;
}

RelaxedGrade grade_relaxed(const StressTrace& predicted, const StressTrace& measured,
                           double drop_fraction, int baseline_window) {
    RelaxedGrade g;
    g.predicted_status = classify_trace_status(predicted, drop_fraction, baseline_window);
    g.measured_status = classify_trace_status(measured, drop_fraction, baseline_window);
    g.agree = g.predicted_status == g.measured_status;
    return g;
}

GeneralizedGrade grade_generalized(const std::vector<StressTrace>& predicted_curves,
                                   double flux_ncm2s, double drop_fraction, int baseline_window,
                                   double final_fluence_ncm2) {
    if (predicted_curves.empty()) throw DomainError("grade_generalized: empty cohort");
    GeneralizedGrade g;
    int failed = 0;
    for (const auto& curve : predicted_curves) {
        DeviceStatus s = classify_trace_status(curve, drop_fraction, baseline_window);
        if (s.is_fail()) ++failed;
        g.statuses.push_back(s);
    }
    g.fit = compute_fit(failed, static_cast<int>(predicted_curves.size()), final_fluence_ncm2,
                        flux_ncm2s);
    return g;
}

GradeReport grade_curve(const StressTrace& predicted, const StressTrace& measured,
                        double point_tolerance, double drop_fraction, int baseline_window) {
    if (predicted.points.size() != measured.points.size())
        throw ContractError("grade_curve: sampled positions differ");
    std::vector<double> p, m;
    for (std::size_t i = 0; i < predicted.points.size(); ++i) {
        p.push_back(predicted.points[i].current_a);
        m.push_back(measured.points[i].current_a);
    }
    GradeReport r;
    r.strict = grade_strict(p, m, point_tolerance);
    r.relaxed = grade_relaxed(predicted, measured, drop_fraction, baseline_window);
    return r;
}

// ----------------------------------------------------------------- report IO

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << "device_id,manufacturer,device_index,fold,true_status,predicted_status,correct\n";
    for (const auto& d : report.per_device) {
        out << d.id.render() << ',' << d.id.manufacturer << ',' << d.id.index << ',' << d.fold
            << ',' << d.true_status.render() << ',' << d.predicted_status.render() << ','
            << (d.correct ? 1 : 0) << '\n';
    }
}

void write_fold_accuracy_csv(const std::vector<std::pair<std::string, EvaluationReport>>& reports,
                             const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write fold accuracy table: " + path.string());
    out << "model,fold,accuracy\n";
    for (const auto& [name, report] : reports) {
        for (std::size_t i = 0; i < report.evaluated_folds.size(); ++i) {
            out << name << ',' << report.evaluated_folds[i] << ','
                << format_double(report.fold_accuracies[i]) << '\n';
        }
    }
}

}  // namespace radfit
