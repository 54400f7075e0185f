// radfit: command-line front end for the reliability-prediction pipeline.
//
// Subcommands: synth | ingest | preprocess | train | predict | evaluate |
// fit | plot. All randomness flows from --seed (fallback: RADFIT_SEED, then
// 42); identical inputs and seed give byte-identical outputs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radfit/errors.hpp"
#include "radfit/fit.hpp"
#include "radfit/ingest.hpp"
#include "radfit/model_io.hpp"
#include "radfit/preprocess.hpp"
#include "radfit/svg.hpp"
#include "radfit/synthgen.hpp"
#include "radfit/text.hpp"
#include "radfit/workflows.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GridSpec {
    double start, end;
    std::size_t count;
};

/// Everything a run can configure, with documented defaults. Loaded from a
/// JSON config file; individual CLI flags override file values.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string workflow = "direct";  // direct | multistep | curve
    std::string model = "gb";         // logistic | rf | gb
    std::string balancing = "none";   // none | oversample | undersample | smote
    int smote_k = 5;
    std::string group_key = "manufacturer";  // manufacturer | voltage
    double drop_fraction = 0.9;
    int baseline_window = 5;
    double flux_ncm2s = 1e6;
    double criterion_current_a = 1e-6;
    double strict_tolerance = 0.1;
    std::size_t curve_samples = 25;
    int curve_eval_folds = 4;
    GridSpec vgs_grid{-5.0, 5.0, 101};
    GridSpec vds_grid{-5.0, 5.0, 101};
    GridSpec fluence_grid{0.0, 6.0e9, 241};
    radfit::OutlierRuleConfig rules;
    radfit::LearnerHyperparams hyper;
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key))
            throw radfit::FormatError("config: unknown key '" + key + "' in " + where);
    }
}

GridSpec grid_from_json(const json& j, const std::string& where) {
    check_keys(j, {"start", "end", "count"}, where);
    GridSpec g{j.at("start").get<double>(), j.at("end").get<double>(),
               j.at("count").get<std::size_t>()};
    return g;
}

json grid_to_json(const GridSpec& g) {
    return {{"start", g.start}, {"end", g.end}, {"count", g.count}};
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw radfit::IoError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw radfit::FormatError("config file " + path.string() + ": " + e.what());
    }
    check_keys(j,
               {"seed", "workflow", "model", "balancing", "smote_k", "group_key", "drop_fraction",
                "baseline_window", "flux", "criterion_current", "strict_tolerance",
                "curve_samples", "curve_eval_folds", "grids", "outlier_rules", "learner"},
               "top level");
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.workflow = j.value("workflow", c.workflow);
    c.model = j.value("model", c.model);
    c.balancing = j.value("balancing", c.balancing);
    c.smote_k = j.value("smote_k", c.smote_k);
    c.group_key = j.value("group_key", c.group_key);
    c.drop_fraction = j.value("drop_fraction", c.drop_fraction);
    c.baseline_window = j.value("baseline_window", c.baseline_window);
    c.flux_ncm2s = j.value("flux", c.flux_ncm2s);
    c.criterion_current_a = j.value("criterion_current", c.criterion_current_a);
    c.strict_tolerance = j.value("strict_tolerance", c.strict_tolerance);
    c.curve_samples = j.value("curve_samples", c.curve_samples);
    c.curve_eval_folds = j.value("curve_eval_folds", c.curve_eval_folds);
    if (j.contains("grids")) {
        const json& g = j["grids"];
        check_keys(g, {"vgs", "vds", "fluence"}, "grids");
        if (g.contains("vgs")) c.vgs_grid = grid_from_json(g["vgs"], "grids.vgs");
        if (g.contains("vds")) c.vds_grid = grid_from_json(g["vds"], "grids.vds");
        if (g.contains("fluence")) c.fluence_grid = grid_from_json(g["fluence"], "grids.fluence");
    }
    if (j.contains("outlier_rules")) {
        const json& r = j["outlier_rules"];
        check_keys(r,
                   {"jump_ratio", "cloud_fraction", "rise_frac", "min_decline_points",
                    "decline_floor_frac", "i0_lo", "i0_hi", "mad_multiplier", "mad_window",
                    "baseline_window"},
                   "outlier_rules");
        c.rules.jump_ratio = r.value("jump_ratio", c.rules.jump_ratio);
        c.rules.cloud_fraction = r.value("cloud_fraction", c.rules.cloud_fraction);
        c.rules.rise_frac = r.value("rise_frac", c.rules.rise_frac);
        c.rules.min_decline_points = r.value("min_decline_points", c.rules.min_decline_points);
        c.rules.decline_floor_frac = r.value("decline_floor_frac", c.rules.decline_floor_frac);
        c.rules.i0_lo = r.value("i0_lo", c.rules.i0_lo);
        c.rules.i0_hi = r.value("i0_hi", c.rules.i0_hi);
        c.rules.mad_multiplier = r.value("mad_multiplier", c.rules.mad_multiplier);
        c.rules.mad_window = r.value("mad_window", c.rules.mad_window);
        c.rules.baseline_window = r.value("baseline_window", c.rules.baseline_window);
    }
    if (j.contains("learner")) {
        const json& l = j["learner"];
        check_keys(l, {"logistic_l2", "logistic_epochs", "logistic_step", "forest", "boosting"},
                   "learner");
        c.hyper.logistic_l2 = l.value("logistic_l2", c.hyper.logistic_l2);
        c.hyper.logistic_epochs = l.value("logistic_epochs", c.hyper.logistic_epochs);
        c.hyper.logistic_step = l.value("logistic_step", c.hyper.logistic_step);
        if (l.contains("forest")) {
            const json& f = l["forest"];
            check_keys(f, {"n_trees", "max_depth", "min_leaf", "feature_fraction", "bootstrap"},
                       "learner.forest");
            c.hyper.forest.n_trees = f.value("n_trees", c.hyper.forest.n_trees);
            c.hyper.forest.max_depth = f.value("max_depth", c.hyper.forest.max_depth);
            c.hyper.forest.min_leaf = f.value("min_leaf", c.hyper.forest.min_leaf);
            c.hyper.forest.feature_fraction =
                f.value("feature_fraction", c.hyper.forest.feature_fraction);
            c.hyper.forest.bootstrap = f.value("bootstrap", c.hyper.forest.bootstrap);
        }
        if (l.contains("boosting")) {
            const json& b = l["boosting"];
            check_keys(b, {"n_stages", "learning_rate", "max_depth", "min_leaf"},
                       "learner.boosting");
            c.hyper.boosting.n_stages = b.value("n_stages", c.hyper.boosting.n_stages);
            c.hyper.boosting.learning_rate =
                b.value("learning_rate", c.hyper.boosting.learning_rate);
            c.hyper.boosting.max_depth = b.value("max_depth", c.hyper.boosting.max_depth);
            c.hyper.boosting.min_leaf = b.value("min_leaf", c.hyper.boosting.min_leaf);
        }
    }
    return c;
}

json run_config_to_json(const RunConfig& c) {
    return {{"seed", c.seed},
            {"workflow", c.workflow},
            {"model", c.model},
            {"balancing", c.balancing},
            {"smote_k", c.smote_k},
            {"group_key", c.group_key},
            {"drop_fraction", c.drop_fraction},
            {"baseline_window", c.baseline_window},
            {"flux", c.flux_ncm2s},
            {"criterion_current", c.criterion_current_a},
            {"strict_tolerance", c.strict_tolerance},
            {"curve_samples", c.curve_samples},
            {"curve_eval_folds", c.curve_eval_folds},
            {"grids",
             {{"vgs", grid_to_json(c.vgs_grid)},
              {"vds", grid_to_json(c.vds_grid)},
              {"fluence", grid_to_json(c.fluence_grid)}}},
            {"outlier_rules",
             {{"jump_ratio", c.rules.jump_ratio},
              {"cloud_fraction", c.rules.cloud_fraction},
              {"rise_frac", c.rules.rise_frac},
              {"min_decline_points", c.rules.min_decline_points},
              {"decline_floor_frac", c.rules.decline_floor_frac},
              {"i0_lo", c.rules.i0_lo},
              {"i0_hi", c.rules.i0_hi},
              {"mad_multiplier", c.rules.mad_multiplier},
              {"mad_window", c.rules.mad_window},
              {"baseline_window", c.rules.baseline_window}}},
            {"learner",
             {{"logistic_l2", c.hyper.logistic_l2},
              {"logistic_epochs", c.hyper.logistic_epochs},
              {"logistic_step", c.hyper.logistic_step},
              {"forest",
               {{"n_trees", c.hyper.forest.n_trees},
                {"max_depth", c.hyper.forest.max_depth},
                {"min_leaf", c.hyper.forest.min_leaf},
                {"feature_fraction", c.hyper.forest.feature_fraction},
                {"bootstrap", c.hyper.forest.bootstrap}}},
              {"boosting",
               {{"n_stages", c.hyper.boosting.n_stages},
                {"learning_rate", c.hyper.boosting.learning_rate},
                {"max_depth", c.hyper.boosting.max_depth},
                {"min_leaf", c.hyper.boosting.min_leaf}}}}}};
}

/// Echo the effective configuration next to a command's outputs.
void echo_config(const RunConfig& c, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.json", std::ios::binary);
    if (!out) throw radfit::IoError("cannot write config echo in " + dir.string());
    out << run_config_to_json(c).dump(1) << "\n";
}

std::uint64_t env_seed_default() {
    if (const char* env = std::getenv("RADFIT_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw radfit::ParseError(std::string("RADFIT_SEED is not an integer: ") + env);
        }
    }
    return 42;
}

radfit::GridSet grids_from_config(const RunConfig& c) {
    radfit::GridSet g;
    g.vgs_grid = radfit::build_benchmark_grid(radfit::GridAxis::SweepVoltage, c.vgs_grid.start,
                                              c.vgs_grid.end, c.vgs_grid.count,
                                              radfit::GridSpacing::Linear);
    g.vds_grid = radfit::build_benchmark_grid(radfit::GridAxis::SweepVoltage, c.vds_grid.start,
                                              c.vds_grid.end, c.vds_grid.count,
                                              radfit::GridSpacing::Linear);
    g.fluence_grid = radfit::build_benchmark_grid(radfit::GridAxis::Fluence, c.fluence_grid.start,
                                                  c.fluence_grid.end, c.fluence_grid.count,
                                                  radfit::GridSpacing::Linear);
    return g;
}

double trace_baseline(const radfit::StressTrace& trace, int window) {
    std::vector<double> head;
    for (int i = 0; i < window && i < static_cast<int>(trace.points.size()); ++i)
        head.push_back(trace.points[static_cast<std::size_t>(i)].current_a);
    std::sort(head.begin(), head.end());
    if (head.empty()) return 0.0;
    std::size_t n = head.size();
    return n % 2 == 1 ? head[n / 2] : 0.5 * (head[n / 2 - 1] + head[n / 2]);
}

/// Assign outlier/pass/fail statuses in place and return the rule config
/// actually used (baseline band derived from the corpus median).
radfit::OutlierRuleConfig assign_statuses(std::vector<radfit::DeviceRecord>& records,
                                          const RunConfig& config) {
    std::vector<double> baselines;
    for (const auto& r : records)
        baselines.push_back(trace_baseline(r.trace, config.rules.baseline_window));
    std::sort(baselines.begin(), baselines.end());
    double median = baselines.empty()
                        ? 0.0
                        : (baselines.size() % 2 == 1
                               ? baselines[baselines.size() / 2]
                               : 0.5 * (baselines[baselines.size() / 2 - 1] +
                                        baselines[baselines.size() / 2]));
    radfit::OutlierRuleConfig rules = config.rules;
    rules.grid_end_fluence = config.fluence_grid.end;
    if (rules.i0_lo == 0.0 && rules.i0_hi == 0.0) rules = rules.with_baseline_band(median);
    for (auto& r : records) {
        if (auto cls = radfit::classify_device_outlier(r.trace, rules)) {
            r.status = radfit::DeviceStatus::outlier(*cls);
        } else {
            r.status = radfit::classify_trace_status(r.trace, config.drop_fraction,
                                                     config.baseline_window);
        }
    }
    return rules;
}

std::vector<radfit::PipelineRow> model_rows(const std::vector<radfit::PipelineRow>& rows) {
    std::vector<radfit::PipelineRow> out;
    for (const auto& r : rows)
        if (!r.status.is_outlier()) out.push_back(r);
    return out;
}

// ------------------------------------------------------------- subcommands

int cmd_synth(const fs::path& manifest_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed) {
    radfit::SynthManifest manifest;
    if (!manifest_path.empty()) manifest = radfit::load_synth_manifest(manifest_path);
    if (seed) manifest.seed = *seed;
    radfit::SynthCorpus corpus = radfit::generate_corpus(manifest);
    fs::create_directories(out_dir);
    radfit::write_corpus_files(corpus, out_dir);
    radfit::write_synth_manifest(manifest, out_dir / "synth_config.json");
    std::cout << "devices," << corpus.records.size() << "\n";
    return 0;
}

int cmd_ingest(const fs::path& manifest_path, const fs::path& out_path) {
    radfit::RawDatasetManifest manifest = radfit::load_manifest(manifest_path);
    std::vector<radfit::DeviceRecord> records = radfit::load_dataset(manifest);
    radfit::ValidationReport report = radfit::validate_dataset(records);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw radfit::IoError("cannot write validation report: " + out_path.string());
        out << "device_id,message\n";
        for (const auto& issue : report.issues)
            out << issue.id.render() << ",\"" << issue.message << "\"\n";
    }
    std::cout << "devices," << records.size() << "\n"
              << "issues," << report.issues.size() << "\n";
    if (!report.clean()) {
        for (const auto& issue : report.issues)
            std::cerr << issue.id.render() << ": " << issue.message << "\n";
        throw radfit::DataError("dataset failed validation with " +
                                std::to_string(report.issues.size()) + " issue(s)");
    }
    return 0;
}

int cmd_preprocess(const fs::path& manifest_path, const fs::path& out_path,
                   const RunConfig& config) {
    radfit::RawDatasetManifest manifest = radfit::load_manifest(manifest_path);
    std::vector<radfit::DeviceRecord> records = radfit::load_dataset(manifest);
    radfit::ValidationReport report = radfit::validate_dataset(records);
    if (!report.clean())
        throw radfit::DataError("dataset failed validation with " +
                                std::to_string(report.issues.size()) + " issue(s)");
    assign_statuses(records, config);
    radfit::PipelineFile file;
    file.grids = grids_from_config(config);
    file.rows = radfit::build_pipeline_rows(records, file.grids, config.criterion_current_a);
    fs::create_directories(out_path.parent_path().empty() ? "." : out_path.parent_path());
    radfit::write_pipeline_file(file, out_path);
    echo_config(config, out_path.parent_path().empty() ? "." : out_path.parent_path());
    int outliers = 0;
    for (const auto& r : file.rows)
        if (r.status.is_outlier()) ++outliers;
    std::cout << "rows," << file.rows.size() << "\n"
              << "outliers," << outliers << "\n";
    return 0;
}

int cmd_train(const fs::path& pipeline_path, const fs::path& out_path, const RunConfig& config) {
    radfit::PipelineFile file = radfit::load_pipeline_file(pipeline_path);
    std::vector<radfit::PipelineRow> rows = model_rows(file.rows);
    if (rows.empty()) throw radfit::DataError("train: no usable rows in pipeline file");

    fs::path out_dir = out_path.parent_path().empty() ? "." : out_path.parent_path();
    fs::create_directories(out_dir);

    if (config.workflow == "curve") {
        auto sampled = radfit::equally_spaced_indices(file.grids.fluence_grid.count(),
                                                      config.curve_samples);
        radfit::DesignMatrix dm =
            radfit::assemble_design_matrix(rows, radfit::TargetMode::FluencePoints, sampled);
        std::vector<std::size_t> all_rows(dm.predictors.size());
        for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
        radfit::CurveModelBank bank = radfit::train_curve_model_bank(
            dm, all_rows, file.grids.fluence_grid, config.hyper.boosting, config.seed);
        radfit::save_curve_model_bank(bank, out_path);
        echo_config(config, out_dir);
        std::cout << "models," << bank.models.size() << "\n";
        return 0;
    }

    radfit::DesignMatrix dm = radfit::assemble_design_matrix(rows, radfit::TargetMode::Status);
    radfit::BalanceResult balanced = radfit::balance_classes(
        dm.predictors, dm.status_targets,
        config.balancing == "none"          ? radfit::BalanceStrategy::None
        : config.balancing == "oversample"  ? radfit::BalanceStrategy::Oversample
        : config.balancing == "undersample" ? radfit::BalanceStrategy::Undersample
                                            : radfit::BalanceStrategy::Smote,
        config.smote_k, config.seed);

    radfit::LearnerKind kind = radfit::learner_kind_from_string(config.model);
    switch (kind) {
        case radfit::LearnerKind::Logistic: {
            radfit::LogisticModel m = radfit::train_logistic(
                balanced.rows, balanced.labels, config.hyper.logistic_l2,
                config.hyper.logistic_epochs, config.hyper.logistic_step, config.seed);
            radfit::save_logistic_model(m, out_path);
            break;
        }
        case radfit::LearnerKind::Forest: {
            std::vector<double> y(balanced.labels.begin(), balanced.labels.end());
            radfit::ForestModel m =
                radfit::train_random_forest(balanced.rows, y, config.hyper.forest, config.seed);
            radfit::save_forest_model(m, out_path);
            break;
        }
        case radfit::LearnerKind::Boosting: {
            std::vector<double> y(balanced.labels.begin(), balanced.labels.end());
            radfit::BoostOptions opt = config.hyper.boosting;
            opt.loss = radfit::BoostLoss::Logistic;
            radfit::BoostingModel m =
                radfit::train_gradient_boosting(balanced.rows, y, opt, config.seed);
            radfit::save_boosting_model(m, out_path);
            break;
        }
    }
    echo_config(config, out_dir);
    std::cout << "trained," << radfit::to_string(kind) << "\n";
    return 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& pipeline_path,
                const fs::path& out_path, const RunConfig& config) {
    radfit::PipelineFile file = radfit::load_pipeline_file(pipeline_path);
    std::vector<radfit::PipelineRow> rows = model_rows(file.rows);
    if (rows.empty()) throw radfit::DataError("predict: no usable rows in pipeline file");
    std::string kind = radfit::model_kind(model_path);

    std::ostringstream csv;
    if (kind == "curve_bank") {
        radfit::CurveModelBank bank = radfit::load_curve_model_bank(model_path);
        radfit::DesignMatrix dm = radfit::assemble_design_matrix(
            rows, radfit::TargetMode::FluencePoints, bank.sampled_indices);
        csv << "device_id,fluence_ncm2,current_a\n";
        for (std::size_t i = 0; i < dm.predictors.size(); ++i) {
            radfit::StressTrace curve =
                radfit::predict_stress_curve(bank, dm.predictors[i], config.flux_ncm2s);
            for (const auto& pt : curve.points)
                csv << dm.row_ids[i].render() << ',' << radfit::format_double(pt.fluence_ncm2)
                    << ',' << radfit::format_double(pt.current_a) << '\n';
        }
    } else {
        radfit::DesignMatrix dm = radfit::assemble_design_matrix(rows, radfit::TargetMode::Status);
        csv << "device_id,predicted_status,score\n";
        auto emit = [&](std::size_t i, int label, double score) {
            csv << dm.row_ids[i].render() << ','
                << (label == 1 ? radfit::DeviceStatus::fail() : radfit::DeviceStatus::pass())
                       .render()
                << ',' << radfit::format_double(score) << '\n';
        };
        if (kind == "logistic") {
            radfit::LogisticModel m = radfit::load_logistic_model(model_path);
            for (std::size_t i = 0; i < dm.predictors.size(); ++i) {
                double p = m.predict_probability(dm.predictors[i]);
                emit(i, p >= 0.5 ? 1 : 0, p);
            }
        } else if (kind == "forest") {
            radfit::ForestModel m = radfit::load_forest_model(model_path);
            for (std::size_t i = 0; i < dm.predictors.size(); ++i) {
                double v = m.predict(dm.predictors[i]);
                emit(i, v >= 0.5 ? 1 : 0, v);
            }
        } else if (kind == "boosting") {
            radfit::BoostingModel m = radfit::load_boosting_model(model_path);
            for (std::size_t i = 0; i < dm.predictors.size(); ++i) {
                double p = m.predict(dm.predictors[i]);
                emit(i, p >= 0.5 ? 1 : 0, p);
            }
        } else {
            throw radfit::FormatError("predict: unrecognized model kind '" + kind + "'");
        }
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw radfit::IoError("cannot write predictions: " + out_path.string());
    out << csv.str();
    std::cout << "predicted," << rows.size() << "\n";
    return 0;
}

radfit::DirectRunConfig direct_config(const RunConfig& config) {
    radfit::DirectRunConfig rc;
    rc.model = radfit::learner_kind_from_string(config.model);
    rc.balancing = config.balancing == "none"          ? radfit::BalanceStrategy::None
                   : config.balancing == "oversample"  ? radfit::BalanceStrategy::Oversample
                   : config.balancing == "undersample" ? radfit::BalanceStrategy::Undersample
                   : config.balancing == "smote"
                       ? radfit::BalanceStrategy::Smote
                       : throw radfit::ParseError("unknown balancing strategy: '" +
                                                  config.balancing + "'");
    rc.smote_k = config.smote_k;
    rc.seed = config.seed;
    rc.hyper = config.hyper;
    return rc;
}

int cmd_evaluate(const fs::path& pipeline_path, const fs::path& out_dir,
                 const RunConfig& config) {
    radfit::PipelineFile file = radfit::load_pipeline_file(pipeline_path);
    std::vector<radfit::PipelineRow> rows = model_rows(file.rows);
    if (rows.size() < 2) throw radfit::DataError("evaluate: needs >= 2 usable rows");
    fs::create_directories(out_dir);

    if (config.workflow == "curve") {
        auto sampled = radfit::equally_spaced_indices(file.grids.fluence_grid.count(),
                                                      config.curve_samples);
        radfit::DesignMatrix dm =
            radfit::assemble_design_matrix(rows, radfit::TargetMode::FluencePoints, sampled);
        radfit::FoldPlan plan = radfit::make_device_folds(dm.row_ids);

        std::ostringstream csv;
        csv << "device_id,fold,measured_status,predicted_status,agree,rmse\n";
        int agree = 0, total = 0, true_failed = 0;
        std::vector<radfit::StressTrace> predicted_curves;
        radfit::Rng seed_rng(config.seed);
        int eval_folds = std::min(config.curve_eval_folds, plan.fold_count);
        for (int fold = 1; fold <= eval_folds; ++fold) {
            std::set<radfit::DeviceId> test_set(plan.test_sets[fold - 1].begin(),
                                                plan.test_sets[fold - 1].end());
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < dm.row_ids.size(); ++i)
                (test_set.contains(dm.row_ids[i]) ? test_rows : train_rows).push_back(i);
            std::uint64_t fold_seed = seed_rng.next_u64();
            if (train_rows.empty() || test_rows.empty()) continue;
            radfit::CurveModelBank bank = radfit::train_curve_model_bank(
                dm, train_rows, file.grids.fluence_grid, config.hyper.boosting, fold_seed);
            for (std::size_t i : test_rows) {
                radfit::StressTrace pred =
                    radfit::predict_stress_curve(bank, dm.predictors[i], config.flux_ncm2s);
                radfit::StressTrace meas;
                meas.flux_ncm2s = config.flux_ncm2s;
                for (std::size_t k = 0; k < sampled.size(); ++k)
                    meas.points.push_back(
                        {bank.sampled_fluences[k], dm.current_targets[i][k]});
                radfit::GradeReport grade = radfit::grade_curve(
                    pred, meas, config.strict_tolerance, config.drop_fraction,
                    config.baseline_window);
                predicted_curves.push_back(pred);
                if (grade.relaxed.measured_status.is_fail()) ++true_failed;
                ++total;
                if (grade.relaxed.agree) ++agree;
                csv << dm.row_ids[i].render() << ',' << fold << ','
                    << grade.relaxed.measured_status.render() << ','
                    << grade.relaxed.predicted_status.render() << ','
                    << (grade.relaxed.agree ? 1 : 0) << ','
                    << radfit::format_double(grade.strict.rmse) << '\n';
            }
        }
        if (total == 0) throw radfit::DataError("evaluate: no held-out devices");
        radfit::GeneralizedGrade gen = radfit::grade_generalized(
            predicted_curves, config.flux_ncm2s, config.drop_fraction, config.baseline_window,
            file.grids.fluence_grid.end());
        radfit::FitResult oracle =
            radfit::compute_fit(true_failed, total, file.grids.fluence_grid.end(),
                                config.flux_ncm2s);
        {
            std::ofstream out(out_dir / "curve_report.csv", std::ios::binary);
            if (!out) throw radfit::IoError("cannot write curve report");
            out << csv.str();
        }
        json summary = {{"devices", total},
                        {"relaxed_agreement", static_cast<double>(agree) / total},
                        {"predicted_fit", gen.fit.fit},
                        {"measured_fit", oracle.fit}};
        std::ofstream sum(out_dir / "summary.json", std::ios::binary);
        sum << summary.dump(1) << "\n";
        echo_config(config, out_dir);
        std::cout << "relaxed_agreement," << radfit::format_double(
                         static_cast<double>(agree) / total)
                  << "\n";
        return 0;
    }

    radfit::DirectRunConfig rc = direct_config(config);
    radfit::EvaluationReport report;
    if (config.workflow == "direct") {
        report = radfit::run_direct_classification(rows, rc);
    } else if (config.workflow == "multistep") {
        radfit::GroupKey key = config.group_key == "voltage" ? radfit::GroupKey::Voltage
                                                             : radfit::GroupKey::Manufacturer;
        report = radfit::run_multistep_classification(rows, key, rc);
    } else {
        throw radfit::ParseError("unknown workflow: '" + config.workflow + "'");
    }
    radfit::write_report_csv(report, out_dir / "report.csv");
    radfit::write_fold_accuracy_csv({{config.model, report}}, out_dir / "fold_accuracy.csv");
    json summary = {{"overall_accuracy", report.overall_accuracy},
                    {"evaluated_folds", report.evaluated_folds.size()},
                    {"skipped_folds", report.skipped_folds.size()}};
    if (report.step1_accuracy >= 0.0) summary["step1_accuracy"] = report.step1_accuracy;
    std::ofstream sum(out_dir / "summary.json", std::ios::binary);
    sum << summary.dump(1) << "\n";
    echo_config(config, out_dir);
    std::cout << "overall_accuracy," << radfit::format_double(report.overall_accuracy) << "\n";
    return 0;
}

int cmd_fit(int failed, int total, double fluence, double flux) {
    radfit::FitResult r = radfit::compute_fit(failed, total, fluence, flux);
    std::cout << "failed,total,fluence_ncm2,flux_ncm2s,fit,mtbf_hours\n"
              << r.failed_count << ',' << r.total_count << ','
              << radfit::format_double(r.final_fluence_ncm2) << ','
              << radfit::format_double(r.flux_ncm2s) << ',' << radfit::format_double(r.fit) << ','
              << (r.mtbf_infinite() ? "inf" : radfit::format_double(r.mtbf_hours)) << "\n";
    return 0;
}

int cmd_plot(const fs::path& input, const std::string& kind, const fs::path& out) {
    radfit::emit_plot(input, radfit::plot_kind_from_string(kind), out);
    std::cout << "wrote," << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-MOSFET radiation-reliability prediction pipeline"};
    app.require_subcommand(1);

    std::string manifest_path, config_path, pipeline_path, model_path, input_path, out_path;
    std::string model_flag, workflow_flag, balancing_flag, group_flag, kind_flag;
    std::int64_t seed_flag = -1;
    int failed = 0, total = 0;
    double fluence = 0.0, flux = 0.0;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_flag, "random seed (fallback: RADFIT_SEED, then 42)");
    };
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run-config file; flags override it");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic raw dataset");
    synth->add_option("--manifest", manifest_path, "generator manifest JSON (defaults if absent)");
    synth->add_option("--out", out_path, "output directory")->required();
    add_seed(synth);

    CLI::App* ingest = app.add_subcommand("ingest", "load and validate a raw dataset");
    ingest->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    ingest->add_option("--out", out_path, "validation report CSV");

    CLI::App* preprocess =
        app.add_subcommand("preprocess", "standardize a dataset into a pipeline file");
    preprocess->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    preprocess->add_option("--out", out_path, "pipeline CSV path")->required();
    add_config(preprocess);
    add_seed(preprocess);

    CLI::App* train = app.add_subcommand("train", "train a model on a pipeline file");
    train->add_option("--pipeline", pipeline_path, "pipeline CSV")->required();
    train->add_option("--out", out_path, "model JSON path")->required();
    train->add_option("--model", model_flag, "logistic | rf | gb");
    train->add_option("--workflow", workflow_flag, "direct | curve");
    train->add_option("--balancing", balancing_flag, "none | oversample | undersample | smote");
    add_config(train);
    add_seed(train);

    CLI::App* predict = app.add_subcommand("predict", "apply a saved model to pipeline rows");
    predict->add_option("--model-file", model_path, "model JSON")->required();
    predict->add_option("--pipeline", pipeline_path, "pipeline CSV")->required();
    predict->add_option("--out", out_path, "predictions CSV")->required();
    add_config(predict);

    CLI::App* evaluate = app.add_subcommand("evaluate", "cross-validated evaluation");
    evaluate->add_option("--pipeline", pipeline_path, "pipeline CSV")->required();
    evaluate->add_option("--out", out_path, "output directory")->required();
    evaluate->add_option("--mode", workflow_flag, "direct | multistep | curve");
    evaluate->add_option("--model", model_flag, "logistic | rf | gb");
    evaluate->add_option("--balancing", balancing_flag, "none | oversample | undersample | smote");
    evaluate->add_option("--group-key", group_flag, "manufacturer | voltage");
    add_config(evaluate);
    add_seed(evaluate);

    CLI::App* fit = app.add_subcommand("fit", "compute FIT and MTBF from counts");
    fit->add_option("--failed", failed, "failed device count")->required();
    fit->add_option("--total", total, "total device count")->required();
    fit->add_option("--fluence", fluence, "final fluence, n/cm^2")->required();
    fit->add_option("--flux", flux, "beam flux, n/(cm^2 s)")->required();

    CLI::App* plot = app.add_subcommand("plot", "render a result CSV as SVG");
    plot->add_option("--input", input_path, "input CSV")->required();
    plot->add_option("--kind", kind_flag, "heatmap | boxplot | curve_overlay")->required();
    plot->add_option("--out", out_path, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) config = load_run_config(config_path);
        if (config_path.empty()) config.seed = env_seed_default();
        if (seed_flag >= 0) config.seed = static_cast<std::uint64_t>(seed_flag);
        if (!model_flag.empty()) config.model = model_flag;
        if (!workflow_flag.empty()) config.workflow = workflow_flag;
        if (!balancing_flag.empty()) config.balancing = balancing_flag;
        if (!group_flag.empty()) config.group_key = group_flag;

        if (synth->parsed())
            return cmd_synth(manifest_path, out_path,
                             seed_flag >= 0
                                 ? std::optional<std::uint64_t>(
                                       static_cast<std::uint64_t>(seed_flag))
                                 : std::nullopt);
        if (ingest->parsed()) return cmd_ingest(manifest_path, out_path);
        if (preprocess->parsed()) return cmd_preprocess(manifest_path, out_path, config);
        if (train->parsed()) return cmd_train(pipeline_path, out_path, config);
        if (predict->parsed()) return cmd_predict(model_path, pipeline_path, out_path, config);
        if (evaluate->parsed()) return cmd_evaluate(pipeline_path, out_path, config);
        if (fit->parsed()) return cmd_fit(failed, total, fluence, flux);
        if (plot->parsed()) return cmd_plot(input_path, kind_flag, out_path);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const radfit::ContractError& e) {
        std::cerr << "contract error: " << e.what() << "\n";
        return 3;
    } catch (const radfit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
