#include "radfit/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "radfit/errors.hpp"

namespace radfit {

namespace {

using nlohmann::json;

json tree_to_json(const TreeModel& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value}});
    }
    return {{"nodes", nodes}, {"max_depth", t.max_depth}, {"min_leaf", t.min_leaf}};
}

TreeModel tree_from_json(const json& j) {
    TreeModel t;
    t.max_depth = j.at("max_depth").get<int>();
    t.min_leaf = j.at("min_leaf").get<int>();
    for (const auto& n : j.at("nodes")) {
        t.nodes.push_back({n.at("f").get<int>(), n.at("t").get<double>(), n.at("l").get<int>(),
                           n.at("r").get<int>(), n.at("v").get<double>()});
    }
    return t;
}

json boosting_to_json(const BoostingModel& m) {
    json stages = json::array();
    for (const auto& s : m.stages) stages.push_back(tree_to_json(s));
    return {{"initial_prediction", m.initial_prediction},
            {"stages", stages},
            {"learning_rate", m.learning_rate},
            {"loss", m.loss == BoostLoss::Squared ? "squared" : "logistic"},
            {"stage_losses", m.stage_losses}};
}

BoostingModel boosting_from_json(const json& j) {
    BoostingModel m;
    m.initial_prediction = j.at("initial_prediction").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.loss = j.at("loss").get<std::string>() == "squared" ? BoostLoss::Squared
                                                          : BoostLoss::Logistic;
    m.stage_losses = j.at("stage_losses").get<std::vector<double>>();
    for (const auto& s : j.at("stages")) m.stages.push_back(tree_from_json(s));
    return m;
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out << j.dump(1) << "\n";
}

json read_json(const std::filesystem::path& path, const std::string& expected_kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("model file " + path.string() + ": " + e.what());
    }
    if (!expected_kind.empty() && j.value("kind", "") != expected_kind)
        throw FormatError("model file " + path.string() + " is not a " + expected_kind + " model");
    return j;
}

}  // namespace

void save_logistic_model(const LogisticModel& model, const std::filesystem::path& path) {
    write_json({{"kind", "logistic"},
                {"weights", model.weights},
                {"bias", model.bias},
                {"l2_strength", model.l2_strength}},
               path);
}

void save_forest_model(const ForestModel& model, const std::filesystem::path& path) {
    json trees = json::array();
    for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
    write_json({{"kind", "forest"},
                {"trees", trees},
                {"bootstrap_seeds", model.bootstrap_seeds},
                {"feature_fraction", model.feature_fraction}},
               path);
}

void save_boosting_model(const BoostingModel& model, const std::filesystem::path& path) {
    json j = boosting_to_json(model);
    j["kind"] = "boosting";
    write_json(j, path);
}

void save_curve_model_bank(const CurveModelBank& bank, const std::filesystem::path& path) {
    json models = json::array();
    for (const auto& m : bank.models) models.push_back(boosting_to_json(m));
    write_json({{"kind", "curve_bank"},
                {"sampled_indices", bank.sampled_indices},
                {"sampled_fluences", bank.sampled_fluences},
                {"models", models},
                {"predictor_columns", bank.predictor_columns}},
               path);
}

std::string model_kind(const std::filesystem::path& path) {
    return read_json(path, "").value("kind", "");
}

LogisticModel load_logistic_model(const std::filesystem::path& path) {
    json j = read_json(path, "logistic");
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.l2_strength = j.at("l2_strength").get<double>();
    return m;
}

ForestModel load_forest_model(const std::filesystem::path& path) {
    json j = read_json(path, "forest");
    ForestModel m;
    m.feature_fraction = j.at("feature_fraction").get<double>();
    m.bootstrap_seeds = j.at("bootstrap_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
}

BoostingModel load_boosting_model(const std::filesystem::path& path) {
    return boosting_from_json(read_json(path, "boosting"));
}

CurveModelBank load_curve_model_bank(const std::filesystem::path& path) {
    json j = read_json(path, "curve_bank");
    CurveModelBank bank;
    bank.sampled_indices = j.at("sampled_indices").get<std::vector<std::size_t>>();
    bank.sampled_fluences = j.at("sampled_fluences").get<std::vector<double>>();
    bank.predictor_columns = j.at("predictor_columns").get<std::vector<std::string>>();
    for (const auto& m : j.at("models")) bank.models.push_back(boosting_from_json(m));
    return bank;
}

}  // namespace radfit
