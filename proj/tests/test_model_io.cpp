#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"
#include "vqa/error.hpp"
#include "vqa/model_io.hpp"
#include "vqa/table_io.hpp"

using namespace vqa;

namespace {

FeatureVector random_features(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 2.0);
  FeatureVector fv;
  for (double& v : fv.values) v = g(rng);
  return fv;
}

}  // namespace

TEST_CASE("double text round trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double("+2.5") == 2.5);
  CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_double(""), ParseError);
  CHECK_THROWS_AS(parse_double("nan"), ParseError);
}

TEST_CASE("feature csv") {
  std::mt19937_64 rng(2);
  std::vector<FeatureRow> rows = {{"a", random_features(rng)}, {"clip b", random_features(rng)}};
  std::stringstream ss;
  write_feature_csv(ss, rows);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "clip_id,si,ti,colorfulness,avg_luminance,sharpness,contrast,ti_first,ssim_pair,ssim_first");
  const auto back = read_feature_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].clip_id == "clip b");
  CHECK(back[0].features.values == rows[0].features.values);

  std::stringstream crlf("clip_id,si,ti,colorfulness,avg_luminance,sharpness,contrast,ti_first,ssim_pair,ssim_first\r\n"
                         "x,1,2,3,4,5,6,7,8,9\r\n\r\n");
  CHECK(read_feature_csv(crlf)[0].features[Feature::kSsimFirst] == 9.0);

  std::stringstream wrong("clip_id,si,ti\nx,1,2\n");
  CHECK_THROWS_AS(read_feature_csv(wrong), ParseError);
  std::stringstream short_row(
      "clip_id,si,ti,colorfulness,avg_luminance,sharpness,contrast,ti_first,ssim_pair,ssim_first\nx,1,2\n");
  CHECK_THROWS_AS(read_feature_csv(short_row), ParseError);
  std::stringstream empty;
  CHECK_THROWS_AS(read_feature_csv(empty), EmptyInput);
  CHECK_THROWS_AS(read_feature_csv(std::filesystem::path("/nonexistent/x.csv")), Error);
}

TEST_CASE("score csv") {
  const ScoreTable t = {{"a", 1.25}, {"b", -3.0}};
  std::stringstream ss;
  write_score_csv(ss, t, "mos");
  CHECK(ss.str() == "clip_id,mos\na,1.25\nb,-3\n");
  CHECK(read_score_csv(ss) == t);
  std::stringstream bad("clip_id,score\na,1,2\n");
  CHECK_THROWS_AS(read_score_csv(bad), ParseError);
  std::stringstream bad_header("id,score\na,1\n");
  CHECK_THROWS_AS(read_score_csv(bad_header), ParseError);
}

TEST_CASE("branch net checkpoint round trip") {
  std::mt19937_64 rng(3);
  BranchNet net = init_branch_net({}, 17);
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(random_features(rng));
  net.scaler = InputScaler::fit(rows);
  net.aesthetic_fusion.gate_dropout = 0.2;
  // perturb weights so they no longer equal the seeded initialisation
  auto theta = flatten_parameters(net);
  for (double& v : theta) v += 1e-3;
  assign_parameters(net, theta);

  const BranchNet back = branch_net_from_json(branch_net_to_json(net));
  CHECK(flatten_parameters(back) == flatten_parameters(net));
  CHECK(back.scaler.mean == net.scaler.mean);
  CHECK(back.scaler.scale == net.scaler.scale);
  CHECK(back.dims == net.dims);
  CHECK(back.aesthetic_fusion.gate_dropout == 0.2);
  for (const auto& fv : rows) CHECK(forward(back, fv).final_score() == forward(net, fv).final_score());

  const auto j = nlohmann::json::parse(branch_net_to_json(net));
  CHECK(j["format"] == "vqa-branchnet");
  CHECK(j["version"] == 1);
  CHECK(j["weights"].size() == parameter_count(net));
}

TEST_CASE("forest checkpoint round trip") {
  std::mt19937_64 rng(4);
  std::vector<FeatureVector> rows;
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    rows.push_back(random_features(rng));
    y.push_back(rows.back().values[0] * 0.5 + 3);
  }
  ForestOptions opt;
  opt.n_trees = 12;
  opt.seed = 5;
  const ForestModel m = fit_forest(feature_rows(rows), y, opt);
  const ForestModel back = forest_from_json(forest_to_json(m));
  CHECK(back.trees.size() == 12);
  CHECK(back.node_count() == m.node_count());
  CHECK(back.seed == 5);
  for (const auto& fv : rows) CHECK(back.predict(fv) == m.predict(fv));

  auto j = nlohmann::json::parse(forest_to_json(m));
  j["trees"][0]["nodes"][0][2] = 999;
  if (j["trees"][0]["nodes"][0][0] >= 0) CHECK_THROWS_AS(forest_from_json(j.dump()), ParseError);
  j = nlohmann::json::parse(forest_to_json(m));
  j["n_trees"] = 13;
  CHECK_THROWS_AS(forest_from_json(j.dump()), ParseError);
}

TEST_CASE("model files dispatch on format") {
  testutil::TempDir dir("model_io");
  const BranchNet net = init_branch_net({}, 1);
  save_model(net, dir / "net.json");
  const Model loaded = load_model(dir / "net.json");
  REQUIRE(std::holds_alternative<BranchNet>(loaded));
  FeatureVector fv;
  fv.values.fill(0.3);
  CHECK(predict(loaded, fv) == forward(net, fv).final_score());

  CHECK_THROWS_AS(model_from_json(R"({"format":"other"})"), Unsupported);
  CHECK_THROWS_AS(model_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(branch_net_from_json(R"({"format":"vqa-branchnet","version":2})"), Unsupported);
  CHECK_THROWS_AS(branch_net_from_json(R"({"format":"vqa-branchnet","version":1})"), ParseError);
  CHECK_THROWS_AS(load_model(dir / "missing.json"), Error);
}

TEST_CASE("training log json") {
  TrainLog log;
  log.epochs.push_back({"siamese", 1, 0.5, {3, 5}});
  log.epochs.push_back({"finetune", 0, 1.5, {}});
  const auto j = nlohmann::json::parse(train_log_to_json(log, {"a", "b"}));
  REQUIRE(j["epochs"].size() == 2);
  CHECK(j["epochs"][0]["dataset_samples"]["b"] == 5);
  CHECK(j["epochs"][1]["phase"] == "finetune");
  CHECK_FALSE(j["epochs"][1].contains("dataset_samples"));
}
