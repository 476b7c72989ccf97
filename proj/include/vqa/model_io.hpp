#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "vqa/branch_net.hpp"
#include "vqa/forest.hpp"
#include "vqa/training.hpp"

namespace vqa {

using Model = std::variant<BranchNet, ForestModel>;

std::string branch_net_to_json(const BranchNet& net);
BranchNet branch_net_from_json(const std::string& text);

std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);

/// Dispatches on the "format" field.
Model model_from_json(const std::string& text);
Model load_model(const std::filesystem::path& path);
void save_model(const Model& model, const std::filesystem::path& path);

double predict(const Model& model, const FeatureVector& fv);

std::string train_log_to_json(const TrainLog& log, const std::vector<std::string>& dataset_names);

}  // namespace vqa
