#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "repread/actdump.hpp"
#include "repread/reading_vector.hpp"

namespace repread {

struct ScenarioScore {
  std::uint32_t scenario_id = 0;
  double score = 0.0;
};

struct ScoreSummary {
  std::string contrast_name;
  std::vector<ScenarioScore> per_scenario_scores;
  double mean = 0.0;
  double se = 0.0;
  std::uint32_t n = 0;
  std::string label;
};

double project(const ReadingVector& v, const Vec& activation);

/// Affine map sending mu_ref to 0 and mu_exp to 1. Not clamped.
double normalize_score(double projection, const ReadingVector& v);

/// Maps a record's prompt id to the scenario id reported in the summary.
using ScenarioIdMap = std::function<std::uint32_t(std::uint32_t prompt_id)>;

ScoreSummary score_scenarios(const ReadingVector& v, const std::vector<UnframedVector>& unframed,
                             const ScenarioIdMap& scenario_of = {});

/// Summarizes already-normalized scores: mean, SE = sample sd / sqrt(n)
/// (0 for a single score) and the orientation label.
ScoreSummary summarize_scores(std::string contrast_name, std::vector<ScenarioScore> scores,
                              const std::string& experimental_pole,
                              const std::string& reference_pole);

/// Advisory label from distance to the midpoint: near center (< 0.02),
/// slightly (< 0.10), plain (< 0.20), strongly.
std::string orientation_label(double mean_score, const std::string& experimental_pole,
                              const std::string& reference_pole);

/// "contrast,mean,se,n,label"
std::string csv_header();
std::string to_csv_row(const ScoreSummary& s);
nlohmann::json to_json(const ScoreSummary& s);
ScoreSummary score_summary_from_json(const nlohmann::json& j);

}  // namespace repread
