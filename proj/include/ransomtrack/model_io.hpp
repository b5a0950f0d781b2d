#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ransomtrack/error.hpp"
#include "ransomtrack/model.hpp"

namespace ransomtrack {

// Self-describing model files. JSON keeps the format inspectable; doubles are
// emitted in shortest round-trip form, so a save/load cycle reproduces
// predictions bit-for-bit.
inline constexpr const char* kModelFormatName = "ransomtrack-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"n", n.n_samples}});
    return nodes;
}

inline Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.value = jn.at("value").get<double>();
        n.n_samples = jn.at("n").get<std::size_t>();
        t.nodes.push_back(n);
    }
    return t;
}

inline json standardizer_to_json(const Standardizer& s) {
    return {{"mean", s.mean()}, {"std", s.stddev()}};
}

inline Standardizer standardizer_from_json(const json& j) {
    return Standardizer(j.at("mean").get<std::vector<double>>(),
                        j.at("std").get<std::vector<double>>());
}

inline json hyperparams_to_json(const Hyperparams& h) {
    return {{"tree", {{"max_depth", h.tree.max_depth},
                      {"min_samples_split", h.tree.min_samples_split},
                      {"criterion", "gini"}}},
            {"forest", {{"n_trees", h.forest.n_trees}, {"bootstrap", h.forest.bootstrap},
                        {"feature_subsample", "sqrt"}}},
            {"logistic", {{"learning_rate", h.logistic.learning_rate},
                          {"epochs", h.logistic.epochs},
                          {"l2", h.logistic.l2}}},
            {"knn", {{"k", h.knn.k}, {"metric", "euclidean_standardized"}}},
            {"boosted", {{"rounds", h.boosted.rounds},
                         {"learning_rate", h.boosted.learning_rate},
                         {"max_depth", h.boosted.max_depth},
                         {"lambda", h.boosted.lambda},
                         {"min_child_weight", h.boosted.min_child_weight}}},
            {"voting", {{"weights", h.voting.weights}}}};
}

inline Hyperparams hyperparams_from_json(const json& j) {
    Hyperparams h;
    h.tree.max_depth = j.at("tree").at("max_depth").get<int>();
    h.tree.min_samples_split = j.at("tree").at("min_samples_split").get<int>();
    h.forest.n_trees = j.at("forest").at("n_trees").get<int>();
    h.forest.bootstrap = j.at("forest").at("bootstrap").get<bool>();
    h.logistic.learning_rate = j.at("logistic").at("learning_rate").get<double>();
    h.logistic.epochs = j.at("logistic").at("epochs").get<int>();
    h.logistic.l2 = j.at("logistic").at("l2").get<double>();
    h.knn.k = j.at("knn").at("k").get<int>();
    h.boosted.rounds = j.at("boosted").at("rounds").get<int>();
    h.boosted.learning_rate = j.at("boosted").at("learning_rate").get<double>();
    h.boosted.max_depth = j.at("boosted").at("max_depth").get<int>();
    h.boosted.lambda = j.at("boosted").at("lambda").get<double>();
    h.boosted.min_child_weight = j.at("boosted").at("min_child_weight").get<double>();
    h.voting.weights = j.at("voting").at("weights").get<std::array<double, 5>>();
    return h;
}

inline json state_to_json(const ModelState& state);

inline json voting_to_json(const SoftVotingState& v) {
    return {{"dt", tree_to_json(v.dt.tree)},
            {"rf", [&] {
                 json trees = json::array();
                 for (const Tree& t : v.rf.trees) trees.push_back(tree_to_json(t));
                 return trees;
             }()},
            {"lr", {{"standardizer", standardizer_to_json(v.lr.standardizer)},
                    {"weights", v.lr.weights},
                    {"bias", v.lr.bias},
                    {"loss_history", v.lr.loss_history}}},
            {"knn", {{"standardizer", standardizer_to_json(v.knn.standardizer)},
                     {"train_z", v.knn.train_z},
                     {"train_y", v.knn.train_y},
                     {"k", v.knn.k}}},
            {"boosted", {{"base_score", v.boosted.base_score},
                         {"learning_rate", v.boosted.learning_rate},
                         {"trees", [&] {
                              json trees = json::array();
                              for (const Tree& t : v.boosted.trees) trees.push_back(tree_to_json(t));
                              return trees;
                          }()}}},
            {"weights", v.weights}};
}

inline json state_to_json(const ModelState& state) {
    json out;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DecisionTreeState>) {
                out = {{"tree", tree_to_json(s.tree)}};
            } else if constexpr (std::is_same_v<T, RandomForestState>) {
                json trees = json::array();
                for (const Tree& t : s.trees) trees.push_back(tree_to_json(t));
                out = {{"trees", trees}};
            } else if constexpr (std::is_same_v<T, LogisticState>) {
                out = {{"standardizer", standardizer_to_json(s.standardizer)},
                       {"weights", s.weights},
                       {"bias", s.bias},
                       {"loss_history", s.loss_history}};
            } else if constexpr (std::is_same_v<T, KnnState>) {
                out = {{"standardizer", standardizer_to_json(s.standardizer)},
                       {"train_z", s.train_z},
                       {"train_y", s.train_y},
                       {"k", s.k}};
            } else if constexpr (std::is_same_v<T, BoostedTreesState>) {
                json trees = json::array();
                for (const Tree& t : s.trees) trees.push_back(tree_to_json(t));
                out = {{"base_score", s.base_score},
                       {"learning_rate", s.learning_rate},
                       {"trees", trees}};
            } else if constexpr (std::is_same_v<T, SoftVotingState>) {
                out = voting_to_json(s);
            }
        },
        state);
    return out;
}

inline LogisticState logistic_from_json(const json& j) {
    LogisticState s;
    s.standardizer = standardizer_from_json(j.at("standardizer"));
    s.weights = j.at("weights").get<std::vector<double>>();
    s.bias = j.at("bias").get<double>();
    s.loss_history = j.at("loss_history").get<std::vector<double>>();
    return s;
}

inline KnnState knn_from_json(const json& j) {
    KnnState s;
    s.standardizer = standardizer_from_json(j.at("standardizer"));
    s.train_z = j.at("train_z").get<std::vector<double>>();
    s.train_y = j.at("train_y").get<std::vector<int>>();
    s.k = j.at("k").get<int>();
    return s;
}

inline BoostedTreesState boosted_from_json(const json& trees_holder) {
    BoostedTreesState s;
    s.base_score = trees_holder.at("base_score").get<double>();
    s.learning_rate = trees_holder.at("learning_rate").get<double>();
    for (const auto& t : trees_holder.at("trees")) s.trees.push_back(tree_from_json(t));
    return s;
}

inline ModelState state_from_json(ModelKind kind, const json& j) {
    switch (kind) {
        case ModelKind::DecisionTree:
            return DecisionTreeState{tree_from_json(j.at("tree"))};
        case ModelKind::RandomForest: {
            RandomForestState s;
            for (const auto& t : j.at("trees")) s.trees.push_back(tree_from_json(t));
            return s;
        }
        case ModelKind::LogisticRegression:
            return logistic_from_json(j);
        case ModelKind::KNearest:
            return knn_from_json(j);
        case ModelKind::BoostedTrees:
            return boosted_from_json(j);
        case ModelKind::SoftVoting: {
            SoftVotingState v;
            v.dt.tree = tree_from_json(j.at("dt"));
            for (const auto& t : j.at("rf")) v.rf.trees.push_back(tree_from_json(t));
            v.lr = logistic_from_json(j.at("lr"));
            v.knn = knn_from_json(j.at("knn"));
            v.boosted = boosted_from_json(j.at("boosted"));
            v.weights = j.at("weights").get<std::array<double, 5>>();
            return v;
        }
    }
    throw Error("unreachable model kind");
}

} // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["kind"] = to_string(model.kind());
    j["seed"] = model.seed();
    j["hyperparams"] = detail::hyperparams_to_json(model.hyperparams());
    nlohmann::json kinds = nlohmann::json::array();
    for (FeatureKind k : model.space().kinds()) kinds.push_back(to_string(k));
    j["space"] = {{"names", model.space().names()}, {"kinds", kinds}};
    j["state"] = detail::state_to_json(model.state());
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormatName)
        throw Error("not a ransomtrack model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
        throw Error("unsupported model file version " + j.at("version").dump());
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    std::vector<std::string> names = j.at("space").at("names").get<std::vector<std::string>>();
    std::vector<FeatureKind> kinds;
    for (const auto& k : j.at("space").at("kinds"))
        kinds.push_back(feature_kind_from_string(k.get<std::string>()));
    FeatureSpace space(std::move(names), std::move(kinds));
    return TrainedModel(kind, std::move(space),
                        detail::hyperparams_from_json(j.at("hyperparams")),
                        j.at("seed").get<std::uint64_t>(),
                        detail::state_from_json(kind, j.at("state")));
}

inline void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << model_to_json(model).dump(2) << '\n';
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open model file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("cannot parse model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace ransomtrack
