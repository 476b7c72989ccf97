#include "vqa/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vqa/error.hpp"

namespace vqa {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json dims_to_json(const BranchNetDims& d) {
  return {{"technical_in", d.technical_in}, {"aesthetic_in", d.aesthetic_in}, {"semantic_in", d.semantic_in},
          {"hidden", d.hidden},             {"proj", d.proj},                 {"head_hidden", d.head_hidden}};
}

BranchNetDims dims_from_json(const json& j) {
  BranchNetDims d;
  d.technical_in = j.at("technical_in").get<int>();
  d.aesthetic_in = j.at("aesthetic_in").get<int>();
  d.semantic_in = j.at("semantic_in").get<int>();
  d.hidden = j.at("hidden").get<int>();
  d.proj = j.at("proj").get<int>();
  d.head_hidden = j.at("head_hidden").get<int>();
  return d;
}

void check_format(const json& j, const char* format) {
  if (j.value("format", "") != format) throw Unsupported(j.value("format", "<missing>"));
  if (j.value("version", 0) != kFormatVersion) throw Unsupported("version " + std::to_string(j.value("version", 0)));
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, "json");
  }
}

}  // namespace

std::string branch_net_to_json(const BranchNet& net) {
  json j;
  j["format"] = "vqa-branchnet";
  j["version"] = kFormatVersion;
  j["dims"] = dims_to_json(net.dims);
  j["seed"] = net.init_seed;
  j["gate_dropout"] = {net.aesthetic_fusion.gate_dropout, net.technical_fusion.gate_dropout};
  j["scaler"] = {{"mean", net.scaler.mean}, {"scale", net.scaler.scale}};
  j["weights"] = flatten_parameters(net);
  return j.dump();
}

BranchNet branch_net_from_json(const std::string& text) {
  const json j = parse_json(text);
  try {
    check_format(j, "vqa-branchnet");
    BranchNet net = init_branch_net(dims_from_json(j.at("dims")), j.at("seed").get<std::uint64_t>());
    const auto dropout = j.at("gate_dropout").get<std::vector<double>>();
    if (dropout.size() != 2) throw ParseError(0, "gate_dropout");
    net.aesthetic_fusion.gate_dropout = dropout[0];
    net.technical_fusion.gate_dropout = dropout[1];
    net.scaler.mean = j.at("scaler").at("mean").get<std::array<double, kFeatureCount>>();
    net.scaler.scale = j.at("scaler").at("scale").get<std::array<double, kFeatureCount>>();
    assign_parameters(net, j.at("weights").get<std::vector<double>>());
    return net;
  } catch (const json::exception& e) {
    throw ParseError(0, e.what());
  }
}

std::string forest_to_json(const ForestModel& model) {
  json j;
  j["format"] = "vqa-forest";
  j["version"] = kFormatVersion;
  j["n_features"] = model.n_features;
  j["n_trees"] = model.trees.size();
  j["seed"] = model.seed;
  j["max_depth"] = model.max_depth;
  j["min_leaf"] = model.min_leaf;
  j["max_features"] = model.max_features;
  j["bootstrap"] = model.bootstrap;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.count});
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

ForestModel forest_from_json(const std::string& text) {
  const json j = parse_json(text);
  try {
    check_format(j, "vqa-forest");
    ForestModel model;
    model.n_features = j.at("n_features").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.max_depth = j.at("max_depth").get<int>();
    model.min_leaf = j.at("min_leaf").get<int>();
    model.max_features = j.at("max_features").get<int>();
    model.bootstrap = j.at("bootstrap").get<bool>();
    for (const auto& jt : j.at("trees")) {
      RegressionTree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.value = jn.at(4).get<double>();
        n.count = jn.at(5).get<std::size_t>();
        tree.nodes.push_back(n);
      }
      const int size = static_cast<int>(tree.nodes.size());
      for (const auto& n : tree.nodes) {
        const bool bad_split = n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= model.n_features ||
                                                  n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size);
        if (bad_split) throw ParseError(0, "tree node");
      }
      if (tree.nodes.empty()) throw ParseError(0, "empty tree");
      model.trees.push_back(std::move(tree));
    }
    if (model.trees.size() != j.at("n_trees").get<std::size_t>()) throw ParseError(0, "n_trees");
    return model;
  } catch (const json::exception& e) {
    throw ParseError(0, e.what());
  }
}

Model model_from_json(const std::string& text) {
  const json j = parse_json(text);
  const std::string format = j.is_object() ? j.value("format", "") : "";
  if (format == "vqa-branchnet") return branch_net_from_json(text);
  if (format == "vqa-forest") return forest_from_json(text);
  throw Unsupported(format.empty() ? "<missing format>" : format);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (const auto* net = std::get_if<BranchNet>(&model)) {
    out << branch_net_to_json(*net) << '\n';
  } else {
    out << forest_to_json(std::get<ForestModel>(model)) << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

double predict(const Model& model, const FeatureVector& fv) {
  if (const auto* net = std::get_if<BranchNet>(&model)) return forward(*net, fv).final_score();
  return std::get<ForestModel>(model).predict(fv);
}

std::string train_log_to_json(const TrainLog& log, const std::vector<std::string>& dataset_names) {
  json epochs = json::array();
  for (const auto& e : log.epochs) {
    json rec = {{"phase", e.phase}, {"epoch", e.epoch}, {"loss", e.loss}};
    if (!e.dataset_samples.empty()) {
      json samples = json::object();
      for (std::size_t k = 0; k < e.dataset_samples.size(); ++k) {
        const std::string name = k < dataset_names.size() ? dataset_names[k] : std::to_string(k);
        samples[name] = e.dataset_samples[k];
      }
      rec["dataset_samples"] = std::move(samples);
    }
    epochs.push_back(std::move(rec));
  }
  return json{{"epochs", std::move(epochs)}}.dump(2);
}

}  // namespace vqa
