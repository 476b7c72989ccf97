#include "vqa/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vqa/bench.hpp"
#include "vqa/clip_io.hpp"
#include "vqa/error.hpp"
#include "vqa/features.hpp"
#include "vqa/forest.hpp"
#include "vqa/metrics.hpp"
#include "vqa/model_io.hpp"
#include "vqa/parallel.hpp"
#include "vqa/pipelines.hpp"
#include "vqa/pnm.hpp"
#include "vqa/sampling.hpp"
#include "vqa/scoring.hpp"
#include "vqa/table_io.hpp"
#include "vqa/training.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace vqa {

namespace {

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string format = "csv";
  std::string config;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("-o,--out,--output", c.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--config", c.config, "JSON file with default flag values");
}

int resolve_threads(const Common& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

// Writes to the --out file, or to `out` when no path was given.
void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("cannot write " + c.out);
  f << text;
  if (!f) throw Error("write failed for " + c.out);
}

bool has_ext(const fs::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return std::any_of(exts.begin(), exts.end(), [&](const char* x) { return e == x; });
}

struct ClipSource {
  std::string id;
  fs::path path;
  bool frame_dir = false;
};

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  return entries;
}

std::vector<ClipSource> discover_clips(const std::vector<std::string>& inputs) {
  std::vector<ClipSource> sources;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_regular_file(p)) {
      sources.push_back({p.stem().string(), p, false});
      continue;
    }
    if (!fs::is_directory(p)) throw Error("input not found: " + in);
    const auto entries = sorted_entries(p);
    const bool is_frame_dir = std::any_of(entries.begin(), entries.end(), [](const fs::path& e) {
      return fs::is_regular_file(e) && has_ext(e, {".pgm", ".ppm"});
    });
    if (is_frame_dir) {
      sources.push_back({p.filename().string(), p, true});
      continue;
    }
    for (const auto& e : entries) {
      if (fs::is_directory(e)) {
        sources.push_back({e.filename().string(), e, true});
      } else if (has_ext(e, {".y4m"})) {
        sources.push_back({e.stem().string(), e, false});
      }
    }
  }
  return sources;
}

std::string features_to_json(const std::vector<FeatureRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json o;
    o["clip_id"] = r.clip_id;
    for (std::size_t i = 0; i < kFeatureCount; ++i) o[std::string(kFeatureNames[i])] = r.features.values[i];
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string scores_to_json(const ScoreTable& table) {
  ordered_json arr = ordered_json::array();
  for (const auto& [id, s] : table) arr.push_back({{"clip_id", id}, {"score", s}});
  return arr.dump(2) + "\n";
}

std::string score_csv(const ScoreTable& table) {
  std::ostringstream ss;
  write_score_csv(ss, table);
  return ss.str();
}

// Joins feature rows with MOS rows; every feature row needs a MOS value.
Dataset join_dataset(const std::string& name, const std::vector<FeatureRow>& rows, const ScoreTable& mos) {
  std::map<std::string, double> by_id;
  for (const auto& [id, v] : mos) {
    if (!by_id.emplace(id, v).second) throw DuplicateId(id);
  }
  std::set<std::string> seen;
  Dataset d;
  d.name = name;
  for (const auto& r : rows) {
    if (!seen.insert(r.clip_id).second) throw DuplicateId(r.clip_id);
    const auto it = by_id.find(r.clip_id);
    if (it == by_id.end()) throw JoinError(r.clip_id);
    d.features.push_back(r.features);
    d.mos.push_back(it->second);
  }
  return d;
}

// --- extract ----------------------------------------------------------------

struct ExtractArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string temporal = "all";
  std::string spatial = "none";
  double fps = 30.0;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  const TemporalMode mode = parse_temporal_mode(a.temporal);
  const SpatialTransform transform = parse_spatial_transform(a.spatial, a.common.seed);
  if (!(a.fps > 0.0)) throw Error("--fps must be positive");
  const int threads = resolve_threads(a.common);
  const auto sources = discover_clips(a.inputs);
  if (sources.empty()) throw EmptyInput("no clips found in the given inputs");

  std::vector<FeatureRow> rows;
  std::size_t failures = 0;
  for (const auto& src : sources) {
    try {
      const VideoClip clip = src.frame_dir
                                 ? load_frame_dir(src.path, Fps{static_cast<std::int64_t>(std::lround(a.fps * 1000)), 1000})
                                 : read_y4m_file(src.path);
      const TemporalPlan plan = temporal_sample(clip, mode);
      FeatureVector fv = std::holds_alternative<transform::Identity>(transform)
                             ? extract_clip_features(clip, plan, threads)
                             : extract_view_features(make_view(clip, plan, transform, true, threads), threads);
      rows.push_back({src.id, fv});
    } catch (const Error& e) {
      ++failures;
      err << "vqa extract: " << src.path.string() << ": " << e.what() << '\n';
    }
  }
  if (rows.empty()) {
    err << "vqa extract: no readable clips\n";
    return kExitFatal;
  }
  if (a.common.format == "json") {
    emit(a.common, out, features_to_json(rows));
  } else {
    std::ostringstream ss;
    write_feature_csv(ss, rows);
    emit(a.common, out, ss.str());
  }
  return failures > 0 ? kExitPartial : kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::vector<std::string> features;
  std::vector<std::string> mos;
  std::string mode = "siamese+finetune";
  std::string log;
  int epochs = 10;
  int finetune_epochs = -1;
  double lr = 1e-4;
  double finetune_lr = -1.0;
  double weight_decay = 0.05;
  int batch_size = 16;
  double margin = kDefaultRankMargin;
  double rank_weight = 1.0;
  double linearity_weight = 1.0;
  bool no_dropout = false;
  int trees = 300;
  int max_depth = 12;
  int min_leaf = 2;
};

int cmd_train(const TrainArgs& a, std::ostream& err) {
  if (a.features.size() != a.mos.size()) throw Error("--features and --mos must be given the same number of times");
  if (a.common.out.empty()) throw Error("train needs --out");
  const int threads = resolve_threads(a.common);

  std::vector<Dataset> datasets;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < a.features.size(); ++k) {
    const std::string name = fs::path(a.mos[k]).stem().string();
    datasets.push_back(join_dataset(name, read_feature_csv(fs::path(a.features[k])), read_score_csv(fs::path(a.mos[k]))));
    if (datasets.back().mos.size() < 2) throw EmptyInput("dataset '" + name + "' has fewer than two rows");
    names.push_back(name);
  }
  const std::string log_path = a.log.empty() ? a.common.out + ".log" : a.log;

  if (a.mode == "forest") {
    std::vector<FeatureVector> features;
    std::vector<double> y;
    for (const auto& d : datasets) {
      features.insert(features.end(), d.features.begin(), d.features.end());
      y.insert(y.end(), d.mos.begin(), d.mos.end());
    }
    ForestOptions fo;
    fo.n_trees = a.trees;
    fo.max_depth = a.max_depth;
    fo.min_leaf = a.min_leaf;
    fo.seed = a.common.seed;
    fo.threads = threads;
    const ForestModel model = fit_forest(feature_rows(features), y, fo);
    save_model(model, a.common.out);

    std::vector<double> pred;
    for (const auto& f : features) pred.push_back(model.predict(f));
    ordered_json log;
    log["mode"] = "forest";
    log["n_trees"] = model.trees.size();
    log["tree_nodes"] = model.node_count();
    log["rows"] = y.size();
    log["train_rmse"] = rmse(pred, y);
    std::ofstream(log_path) << log.dump(2) << '\n';
    return kExitOk;
  }
  if (a.mode != "siamese+finetune") throw Error("unknown --mode '" + a.mode + "'");

  BranchNet net = init_branch_net({}, a.common.seed);
  std::vector<FeatureVector> all;
  for (const auto& d : datasets) all.insert(all.end(), d.features.begin(), d.features.end());
  net.scaler = InputScaler::fit(all);

  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.seed = a.common.seed;
  cfg.rank_margin = a.margin;
  cfg.rank_weight = a.rank_weight;
  cfg.linearity_weight = a.linearity_weight;
  cfg.weight_decay = a.weight_decay;
  cfg.gate_dropout = !a.no_dropout;
  cfg.threads = threads;

  TrainLog log;
  if (a.epochs > 0) {
    net = train_siamese(datasets, std::move(net), cfg, &log);
    cfg.epochs = a.finetune_epochs >= 0 ? a.finetune_epochs : a.epochs;
    cfg.learning_rate = a.finetune_lr > 0.0 ? a.finetune_lr : a.lr;
    net = finetune_mos(datasets.front(), std::move(net), cfg, &log);
  } else {
    err << "vqa train: --epochs 0, writing the initialization\n";
  }
  save_model(net, a.common.out);
  std::ofstream(log_path) << train_log_to_json(log, names) << '\n';
  return kExitOk;
}

// --- predict / eval / fuse ------------------------------------------------------

struct PredictArgs {
  Common common;
  std::string model;
  std::string features;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  ScoreTable table;
  for (const auto& row : read_feature_csv(fs::path(a.features))) table.emplace_back(row.clip_id, predict(model, row.features));
  emit(a.common, out, a.common.format == "json" ? scores_to_json(table) : score_csv(table));
  return kExitOk;
}

struct EvalArgs {
  Common common;
  std::string pred;
  std::string mos;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const MetricReport r = evaluate(read_score_csv(fs::path(a.pred)), read_score_csv(fs::path(a.mos)));
  if (a.common.format == "csv") {
    char buf[160];
    std::snprintf(buf, sizeof buf, "srocc,krocc,plcc,rmse\n%.6f,%.6f,%.6f,%.6f\n", r.srocc, r.krocc, r.plcc, r.rmse);
    emit(a.common, out, buf);
  } else {
    emit(a.common, out, metric_report_to_json(r) + "\n");
  }
  return kExitOk;
}

struct FuseArgs {
  Common common;
  std::vector<std::string> preds;
  std::vector<double> weights;
  std::string normalization = "none";
  std::string spec;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  FusionSpec spec;
  if (!a.spec.empty()) {
    std::ifstream in(a.spec, std::ios::binary);
    if (!in) throw Error("cannot open " + a.spec);
    std::stringstream ss;
    ss << in.rdbuf();
    spec = fusion_spec_from_json(ss.str());
  } else {
    spec.weights = a.weights.empty() ? std::vector<double>(a.preds.size(), 1.0) : a.weights;
    spec.normalization = parse_normalization(a.normalization);
  }
  if (spec.weights.size() != a.preds.size()) throw Error("need one weight per --pred file");

  std::vector<ScoreTable> tables;
  for (const auto& p : a.preds) tables.push_back(read_score_csv(fs::path(p)));
  // Align every table to the clip order of the first; the id sets must match.
  std::set<std::string> first_ids;
  for (const auto& row : tables.front()) first_ids.insert(row.first);
  std::vector<std::vector<double>> lists(tables.size());
  for (std::size_t k = 0; k < tables.size(); ++k) {
    std::map<std::string, double> by_id;
    for (const auto& [id, v] : tables[k]) {
      if (!by_id.emplace(id, v).second) throw DuplicateId(id);
      if (!first_ids.contains(id)) throw JoinError(id);
    }
    for (const auto& [id, v] : tables.front()) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw JoinError(id);
      lists[k].push_back(it->second);
    }
  }
  const auto fused = fuse_scores(lists, spec);
  ScoreTable table;
  for (std::size_t i = 0; i < fused.size(); ++i) table.emplace_back(tables.front()[i].first, fused[i]);
  emit(a.common, out, a.common.format == "json" ? scores_to_json(table) : score_csv(table));
  return kExitOk;
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string pipeline = "feature_forest";
  std::string spec = "30-FHD";
  int runs = 10;
  int warmup = 3;
  double budget = 1000.0;
  std::string model;
  bool stages = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const ClipSpec& spec = clip_spec_from_label(a.spec);
  PipelineConfig pc;
  pc.threads = resolve_threads(a.common);
  pc.seed = a.common.seed;
  pc.spec = spec;
  if (!a.model.empty()) pc.model = load_model(a.model);
  const BenchPipeline pipeline = make_pipeline(a.pipeline, pc);
  const VideoClip clip = synth_clip(spec, pattern::Noise{a.common.seed}, {true, pc.threads});

  BenchReport report = time_pipeline(pipeline, clip, spec.label, {a.warmup, a.runs});
  apply_constraint(report, {spec.label, a.budget});

  if (a.common.format == "csv") {
    emit(a.common, out, bench_report_csv_header() + "\n" + bench_report_csv_row(report) + "\n");
  } else {
    ordered_json j = ordered_json::parse(bench_report_to_json(report));
    if (a.stages) {
      ordered_json st = ordered_json::array();
      for (const auto& s : time_stages(pipeline, clip, {a.warmup, a.runs})) {
        st.push_back({{"name", s.name}, {"mean_ms", s.mean_ms}});
      }
      j["stages"] = std::move(st);
    }
    emit(a.common, out, j.dump(2) + "\n");
  }
  if (!*report.pass) err << "vqa bench: " << report.runtime_ms << " ms exceeds the " << a.budget << " ms budget\n";
  return kExitOk;
}

bool flag_present(const std::vector<std::string>& args, const std::string& key) {
  std::vector<std::string> spellings = {"--" + key};
  if (key == "out" || key == "output" || key == "o") spellings = {"-o", "--out", "--output"};
  for (const auto& a : args) {
    for (const auto& s : spellings) {
      if (a == s || a.rfind(s + "=", 0) == 0) return true;
    }
  }
  return false;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  throw Error("unsupported config value " + v.dump());
}

}  // namespace

std::vector<std::string> merge_config_args(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "config");
  }
  if (!cfg.is_object()) throw Error("config must be a JSON object");

  std::vector<std::string> merged = args;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || flag_present(args, key)) continue;
    const std::string flag = key.size() == 1 ? "-" + key : "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_array()) {
      merged.push_back(flag);
      for (const auto& v : value) merged.push_back(scalar_text(v));
    } else {
      merged.push_back(flag);
      merged.push_back(scalar_text(value));
    }
  }
  return merged;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"No-reference video quality toolkit", "vqa"};
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Compute clip feature vectors");
  add_common(extract, ex.common, "csv");
  extract->add_option("-i,--input", ex.inputs, "y4m file, frame directory, or directory of clips")->required();
  extract->add_option("--temporal", ex.temporal, "Temporal sampling mode");
  extract->add_option("--spatial", ex.spatial, "none | resize:WxH | pad_square:S | fragment[:GxP]");
  extract->add_option("--fps", ex.fps, "Frame rate for frame directories");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit a branch net or a forest");
  add_common(train, tr.common, "json");
  train->add_option("--features", tr.features, "Feature CSV, one per dataset")->required();
  train->add_option("--mos", tr.mos, "MOS CSV, one per dataset")->required();
  train->add_option("--mode", tr.mode)->check(CLI::IsMember({"siamese+finetune", "forest"}));
  train->add_option("--log", tr.log, "Training log path (default <out>.log)");
  train->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--finetune-epochs", tr.finetune_epochs);
  train->add_option("--lr", tr.lr)->check(CLI::NonNegativeNumber);
  train->add_option("--finetune-lr", tr.finetune_lr);
  train->add_option("--weight-decay", tr.weight_decay)->check(CLI::NonNegativeNumber);
  train->add_option("--batch-size", tr.batch_size)->check(CLI::Range(2, 1 << 20));
  train->add_option("--margin", tr.margin);
  train->add_option("--rank-weight", tr.rank_weight);
  train->add_option("--linearity-weight", tr.linearity_weight);
  train->add_flag("--no-dropout", tr.no_dropout);
  train->add_option("--trees", tr.trees)->check(CLI::PositiveNumber);
  train->add_option("--max-depth", tr.max_depth)->check(CLI::NonNegativeNumber);
  train->add_option("--min-leaf", tr.min_leaf)->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Score feature rows with a model");
  add_common(predict_cmd, pr.common, "csv");
  predict_cmd->add_option("--model", pr.model)->required();
  predict_cmd->add_option("--features", pr.features)->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Correlation metrics against MOS");
  add_common(eval, ev.common, "json");
  eval->add_option("--pred", ev.pred)->required();
  eval->add_option("--mos", ev.mos)->required();

  FuseArgs fu;
  auto* fuse = app.add_subcommand("fuse", "Weighted fusion of score tables");
  add_common(fuse, fu.common, "csv");
  fuse->add_option("--pred", fu.preds)->required();
  fuse->add_option("--weights", fu.weights);
  fuse->add_option("--normalization", fu.normalization)->check(CLI::IsMember({"none", "zscore"}));
  fuse->add_option("--spec", fu.spec, "Fusion spec JSON");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Time a pipeline on a synthetic clip");
  add_common(bench, be.common, "json");
  bench->add_option("--pipeline", be.pipeline)->check(CLI::IsMember(pipeline_names()));
  bench->add_option("--spec", be.spec)->check(CLI::IsMember({"30-FHD", "60-HD", "30-4K"}));
  bench->add_option("--runs", be.runs)->check(CLI::PositiveNumber);
  bench->add_option("--warmup", be.warmup)->check(CLI::NonNegativeNumber);
  bench->add_option("--budget", be.budget, "Budget in ms")->check(CLI::PositiveNumber);
  bench->add_option("--model", be.model, "Model for the scoring pipelines");
  bench->add_flag("--stages", be.stages, "Also report per-step timings");

  try {
    const std::vector<std::string> args = merge_config_args(raw_args);
    std::vector<const char*> argv = {"vqa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "vqa: " << e.what() << '\n';
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "vqa: " << e.what() << '\n';
    return kExitFatal;
  }

  try {
    if (*extract) return cmd_extract(ex, out, err);
    if (*train) return cmd_train(tr, err);
    if (*predict_cmd) return cmd_predict(pr, out);
    if (*eval) return cmd_eval(ev, out);
    if (*fuse) return cmd_fuse(fu, out);
    if (*bench) return cmd_bench(be, out, err);
  } catch (const std::exception& e) {
    err << "vqa: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace vqa
