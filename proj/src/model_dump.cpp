#include "rinfer/model_dump.hpp"

#include <json.hpp>

namespace rinfer {

namespace {

nlohmann::json to_json(const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

std::string dump_model_json(const L1LogisticModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelDumpVersion;
    j["model"] = "l1_logistic";
    j["lambda"] = model.lambda();
    j["intercept"] = model.intercept();
    j["weights"] = to_json(model.weights());
    j["feature_means"] = to_json(model.feature_means());
    j["feature_scales"] = to_json(model.feature_scales());
    return j.dump(2);
}

std::string dump_model_json(const GbtModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelDumpVersion;
    j["model"] = "gbt";
    j["base_score"] = model.base_score();
    j["learning_rate"] = model.learning_rate();
    j["best_iteration"] = model.best_iteration();
    j["early_stopped"] = model.early_stopped();
    j["n_features"] = model.n_features();
    nlohmann::json trees = nlohmann::json::array();
    for (const RegressionTree& tree : model.trees()) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& nd : tree.nodes) {
            nodes.push_back({{"feature", nd.feature},
                             {"threshold", nd.threshold},
                             {"left", nd.left},
                             {"right", nd.right},
                             {"value", nd.value}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump(2);
}

}  // namespace rinfer
