#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "vqa/features.hpp"
#include "vqa/metrics.hpp"

namespace vqa {

struct FeatureRow {
  std::string clip_id;
  FeatureVector features;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Header: clip_id followed by every feature name in enum order.
void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in);
std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path);

/// Header: clip_id,<value_name>
void write_score_csv(std::ostream& out, const ScoreTable& table, std::string_view value_name = "score");
/// Accepts any second-column name ("score", "mos", ...).
ScoreTable read_score_csv(std::istream& in);
ScoreTable read_score_csv(const std::filesystem::path& path);

}  // namespace vqa
