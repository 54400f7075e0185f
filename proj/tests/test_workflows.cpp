#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <doctest.h>

#include "radfit/errors.hpp"
#include "radfit/model_io.hpp"
#include "radfit/preprocess.hpp"
#include "radfit/rng.hpp"
#include "radfit/synthgen.hpp"
#include "radfit/workflows.hpp"

using namespace radfit;
namespace fs = std::filesystem;

namespace {

// Small fast corpus for workflow tests.
std::vector<PipelineRow> small_clean_rows(double signal, double failure_fraction = 0.5) {
    SynthManifest m;
    m.manufacturer_count = 4;
    m.devices_per_manufacturer = 10;
    m.trace_points = 80;
    m.signal_strength = signal;
    m.failure_fraction = failure_fraction;
    m.outlier_rates = {0, 0, 0, 0, 0, 0};
    SynthCorpus corpus = generate_corpus(m);
    return build_pipeline_rows(corpus.records, default_grid_set());
}

DirectRunConfig fast_config(LearnerKind kind) {
    DirectRunConfig c;
    c.model = kind;
    c.hyper.boosting.n_stages = 40;
    c.hyper.forest.n_trees = 30;
    c.hyper.logistic_epochs = 200;
    return c;
}

}  // namespace

TEST_CASE("learner kind string round trip") {
    for (auto k : {LearnerKind::Logistic, LearnerKind::Forest, LearnerKind::Boosting})
        CHECK(learner_kind_from_string(to_string(k)) == k);
    CHECK(learner_kind_from_string("gb") == LearnerKind::Boosting);
    CHECK(learner_kind_from_string("rf") == LearnerKind::Forest);
    CHECK_THROWS_AS(learner_kind_from_string("svm"), ParseError);
}

TEST_CASE("direct classification learns a separable corpus") {
    auto rows = small_clean_rows(12.0);  // near-deterministic labels
    EvaluationReport r = run_direct_classification(rows, fast_config(LearnerKind::Logistic));
    CHECK(r.overall_accuracy >= 0.75);
    // each fold holds one device index from each of the four manufacturers
    CHECK(r.per_device.size() + 4 * r.skipped_folds.size() == rows.size());
}

TEST_CASE("direct classification on shuffled labels is near the class prior") {
    auto rows = small_clean_rows(6.0, 0.6);
    // destroy the signal by shuffling statuses across devices
    std::vector<DeviceStatus> statuses;
    for (const auto& r : rows) statuses.push_back(r.status);
    Rng rng(17);
    rng.shuffle(statuses);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].status = statuses[i];
    EvaluationReport r = run_direct_classification(rows, fast_config(LearnerKind::Boosting));
    // destroyed signal: must not beat the class prior by any real margin
    CHECK(r.overall_accuracy <= 0.75);
}

TEST_CASE("direct classification is deterministic") {
    auto rows = small_clean_rows(3.0);
    DirectRunConfig c = fast_config(LearnerKind::Forest);
    EvaluationReport a = run_direct_classification(rows, c);
    EvaluationReport b = run_direct_classification(rows, c);
    REQUIRE(a.per_device.size() == b.per_device.size());
    for (std::size_t i = 0; i < a.per_device.size(); ++i) {
        CHECK(a.per_device[i].id == b.per_device[i].id);
        CHECK(a.per_device[i].predicted_status == b.per_device[i].predicted_status);
    }
    CHECK(a.overall_accuracy == b.overall_accuracy);
}

TEST_CASE("direct classification rejects outlier rows") {
    auto rows = small_clean_rows(3.0);
    rows[3].status = DeviceStatus::outlier(OutlierClass::CurrentJump);
    CHECK_THROWS_AS(run_direct_classification(rows, fast_config(LearnerKind::Boosting)),
                    ContractError);
}

TEST_CASE("balancing changes only the training side") {
    auto rows = small_clean_rows(3.0, 0.7);
    DirectRunConfig plain = fast_config(LearnerKind::Logistic);
    DirectRunConfig balanced = plain;
    balanced.balancing = BalanceStrategy::Oversample;
    EvaluationReport a = run_direct_classification(rows, plain);
    EvaluationReport b = run_direct_classification(rows, balanced);
    // same devices evaluated either way; only predictions may differ
    REQUIRE(a.per_device.size() == b.per_device.size());
    for (std::size_t i = 0; i < a.per_device.size(); ++i)
        CHECK(a.per_device[i].id == b.per_device[i].id);
}

TEST_CASE("multistep predicts manufacturer then status") {
    auto rows = small_clean_rows(8.0);
    EvaluationReport r =
        run_multistep_classification(rows, GroupKey::Manufacturer, fast_config(LearnerKind::Forest));
    CHECK(r.step1_accuracy >= 0.75);  // static signatures are manufacturer-distinct
    CHECK(r.per_device.size() + r.group_mispredicted.size() + r.unpredictable.size() ==
          rows.size());
}

TEST_CASE("multistep by voltage groups on the three planted bias levels") {
    auto rows = small_clean_rows(8.0);
    std::vector<double> levels;
    for (const auto& r : rows) levels.push_back(r.bias_voltage_v);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    CHECK(levels == std::vector<double>{685.0, 1027.0, 1369.0});
    EvaluationReport r =
        run_multistep_classification(rows, GroupKey::Voltage, fast_config(LearnerKind::Forest));
    // the bias column is removed from step-1 features, so step 1 is a real
    // prediction task; just assert the bookkeeping partition holds
    CHECK(r.step1_accuracy >= 0.0);
    CHECK(r.step1_accuracy <= 1.0);
    CHECK(r.per_device.size() + r.group_mispredicted.size() + r.unpredictable.size() ==
          rows.size());
}

TEST_CASE("one device per group per fold makes step two unpredictable") {
    SynthManifest m;
    m.manufacturer_count = 4;
    m.devices_per_manufacturer = 2;
    m.trace_points = 60;
    m.outlier_rates = {0, 0, 0, 0, 0, 0};
    SynthCorpus corpus = generate_corpus(m);
    auto rows = build_pipeline_rows(corpus.records, default_grid_set());
    EvaluationReport r =
        run_multistep_classification(rows, GroupKey::Manufacturer, fast_config(LearnerKind::Forest));
    // every fold leaves exactly one device per manufacturer in the training
    // set, so the within-group step-2 training side is always too small
    CHECK(r.per_device.empty());
    CHECK(r.group_mispredicted.size() + r.unpredictable.size() == rows.size());
}

TEST_CASE("equally spaced indices cover the grid ends") {
    auto idx = equally_spaced_indices(241, 25);
    REQUIRE(idx.size() == 25);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 240);
    for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
    CHECK_THROWS_AS(equally_spaced_indices(10, 11), DomainError);
}

TEST_CASE("curve bank on a constant corpus predicts the constant") {
    auto rows = small_clean_rows(3.0, 0.0);  // all passing
    for (auto& r : rows) std::fill(r.fluence_currents.begin(), r.fluence_currents.end(), 0.75);
    auto sampled = equally_spaced_indices(241, 25);
    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::FluencePoints, sampled);
    std::vector<std::size_t> train(dm.predictors.size());
    std::iota(train.begin(), train.end(), 0);
    auto grid = default_grid_set().fluence_grid;
    CurveModelBank bank =
        train_curve_model_bank(dm, train, grid, BoostOptions{BoostLoss::Squared, 20, 0.5, 3, 1}, 1);
    REQUIRE(bank.models.size() == 25);
    for (std::size_t k = 1; k < bank.sampled_fluences.size(); ++k)
        CHECK(bank.sampled_fluences[k] > bank.sampled_fluences[k - 1]);
    StressTrace curve = predict_stress_curve(bank, dm.predictors[0], 1e6);
    REQUIRE(curve.points.size() == 25);
    for (const auto& p : curve.points) CHECK(p.current_a == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("curve bank training rmse stays within generator noise") {
    SynthManifest m;
    m.manufacturer_count = 3;
    m.devices_per_manufacturer = 8;
    m.trace_points = 80;
    m.outlier_rates = {0, 0, 0, 0, 0, 0};
    SynthCorpus corpus = generate_corpus(m);
    auto rows = build_pipeline_rows(corpus.records, default_grid_set());
    auto sampled = equally_spaced_indices(241, 25);
    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::FluencePoints, sampled);
    std::vector<std::size_t> train(dm.predictors.size());
    std::iota(train.begin(), train.end(), 0);
    auto grid = default_grid_set().fluence_grid;
    CurveModelBank bank = train_curve_model_bank(
        dm, train, grid, BoostOptions{BoostLoss::Squared, 120, 0.3, 4, 1}, 1);
    // per-index RMSE <= 2x the relative noise sigma on a ~0.6-0.9 A scale
    for (std::size_t k = 0; k < bank.models.size(); ++k) {
        double sse = 0.0;
        for (std::size_t i = 0; i < dm.predictors.size(); ++i) {
            double d = bank.models[k].predict(dm.predictors[i]) - dm.current_targets[i][k];
            sse += d * d;
        }
        double rmse = std::sqrt(sse / static_cast<double>(dm.predictors.size()));
        CHECK(rmse <= 2.0 * m.noise_sigma);
    }
}

TEST_CASE("schema mismatch in curve prediction is a contract error") {
    auto rows = small_clean_rows(3.0, 0.0);
    auto sampled = equally_spaced_indices(241, 5);
    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::FluencePoints, sampled);
    std::vector<std::size_t> train(dm.predictors.size());
    std::iota(train.begin(), train.end(), 0);
    CurveModelBank bank =
        train_curve_model_bank(dm, train, default_grid_set().fluence_grid,
                               BoostOptions{BoostLoss::Squared, 5, 0.5, 2, 1}, 1);
    Row wrong(dm.predictors[0].size() + 1, 0.0);
    CHECK_THROWS_AS(predict_stress_curve(bank, wrong, 1e6), ContractError);
}

TEST_CASE("strict grade of identical curves passes with zero errors") {
    std::vector<double> y = {1.0, 0.9, 0.8};
    StrictGrade g = grade_strict(y, y, 0.05);
    CHECK(g.pass);
    CHECK(g.rmse == 0.0);
    for (double e : g.point_errors) CHECK(e == 0.0);
}

TEST_CASE("uniform ten percent offset against tolerances") {
    std::vector<double> measured = {1.0, 2.0, 4.0};
    std::vector<double> predicted = {1.1, 2.2, 4.4};
    StrictGrade tight = grade_strict(predicted, measured, 0.05);
    CHECK(!tight.pass);
    for (double e : tight.point_errors) CHECK(e == doctest::Approx(0.10).epsilon(1e-12));
    StrictGrade loose = grade_strict(predicted, measured, 0.2);
    CHECK(loose.pass);
}

TEST_CASE("relaxed grade agreement cases") {
    StressTrace constant;
    constant.flux_ncm2s = 1e6;
    StressTrace dropping = constant;
    for (int i = 0; i < 20; ++i) {
        constant.points.push_back({1e8 * i, 1.0});
        dropping.points.push_back({1e8 * i, i < 10 ? 1.0 : 0.5});
    }
    RelaxedGrade both = grade_relaxed(constant, constant, 0.9, 5);
    CHECK(both.agree);
    CHECK(both.predicted_status.is_pass());
    RelaxedGrade split = grade_relaxed(constant, dropping, 0.9, 5);
    CHECK(!split.agree);
    CHECK(split.measured_status.is_fail());
}

TEST_CASE("generalized grade of constant curves is zero fit") {
    std::vector<StressTrace> curves;
    for (int d = 0; d < 4; ++d) {
        StressTrace t;
        t.flux_ncm2s = 1e6;
        for (int i = 0; i < 20; ++i) t.points.push_back({1e8 * i, 1.0});
        curves.push_back(t);
    }
    GeneralizedGrade g = grade_generalized(curves, 1e6, 0.9, 5, 6.0e9);
    CHECK(g.fit.fit == 0.0);
    for (const auto& s : g.statuses) CHECK(s.is_pass());
}

TEST_CASE("five of twenty-four failing curves give fit 1.25e8") {
    std::vector<StressTrace> curves;
    for (int d = 0; d < 24; ++d) {
        StressTrace t;
        t.flux_ncm2s = 1e6;
        for (int i = 0; i < 20; ++i)
            t.points.push_back({1e8 * i, d < 5 && i >= 10 ? 0.5 : 1.0});
        curves.push_back(t);
    }
    GeneralizedGrade g = grade_generalized(curves, 1e6, 0.9, 5, 6.0e9);
    CHECK(g.fit.failed_count == 5);
    CHECK(g.fit.fit == doctest::Approx(1.25e8).epsilon(1e-12));
}

TEST_CASE("report csv lists one line per device") {
    auto rows = small_clean_rows(3.0);
    EvaluationReport r = run_direct_classification(rows, fast_config(LearnerKind::Logistic));
    fs::path dir = fs::temp_directory_path() / "radfit_report_csv";
    fs::create_directories(dir);
    write_report_csv(r, dir / "report.csv");
    std::ifstream in(dir / "report.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == r.per_device.size() + 1);
}

TEST_CASE("models round trip through their json artifacts") {
    auto rows = small_clean_rows(3.0);
    DesignMatrix dm = assemble_design_matrix(rows, TargetMode::Status);
    std::vector<double> y(dm.status_targets.begin(), dm.status_targets.end());
    fs::path dir = fs::temp_directory_path() / "radfit_model_io";
    fs::create_directories(dir);

    LogisticModel lm = train_logistic(dm.predictors, dm.status_targets, 1e-3, 100, 0.5, 1);
    save_logistic_model(lm, dir / "l.json");
    LogisticModel lm2 = load_logistic_model(dir / "l.json");
    CHECK(lm.weights == lm2.weights);
    CHECK(lm.bias == lm2.bias);

    ForestOptions fo;
    fo.n_trees = 5;
    ForestModel fm = train_random_forest(dm.predictors, y, fo, 2);
    save_forest_model(fm, dir / "f.json");
    ForestModel fm2 = load_forest_model(dir / "f.json");
    BoostingModel bm = train_gradient_boosting(
        dm.predictors, y, BoostOptions{BoostLoss::Logistic, 10, 0.3, 3, 1}, 3);
    save_boosting_model(bm, dir / "b.json");
    BoostingModel bm2 = load_boosting_model(dir / "b.json");
    for (const auto& x : dm.predictors) {
        CHECK(fm.predict(x) == fm2.predict(x));
        CHECK(bm.predict(x) == bm2.predict(x));
    }
    CHECK(model_kind(dir / "b.json") == "boosting");
    CHECK_THROWS_AS(load_forest_model(dir / "b.json"), FormatError);
}
