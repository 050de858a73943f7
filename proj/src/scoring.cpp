#include "repread/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "repread/error.hpp"

namespace repread {

double project(const ReadingVector& v, const Vec& activation) {
  if (activation.size() != v.direction.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "activation has " + std::to_string(activation.size()) + " dims, vector has " +
                    std::to_string(v.direction.size()));
  }
  return activation.dot(v.direction);
}

double normalize_score(double projection, const ReadingVector& v) {
  const double gap = v.mu_exp - v.mu_ref;
  if (gap == 0.0 || !std::isfinite(gap)) {
    throw Error(ErrorKind::kDegenerateAnchors, "pole anchors coincide");
  }
  return (projection - v.mu_ref) / gap;
}

ScoreSummary summarize_scores(std::string contrast_name, std::vector<ScenarioScore> scores,
                              const std::string& experimental_pole,
                              const std::string& reference_pole) {
  if (scores.empty()) throw Error(ErrorKind::kEmptyInput, "no scenario scores");
  ScoreSummary s;
  s.contrast_name = std::move(contrast_name);
  s.per_scenario_scores = std::move(scores);
  s.n = static_cast<std::uint32_t>(s.per_scenario_scores.size());
  double sum = 0.0;
  for (const auto& sc : s.per_scenario_scores) sum += sc.score;
  s.mean = sum / s.n;
  const auto [lo, hi] = std::minmax_element(
      s.per_scenario_scores.begin(), s.per_scenario_scores.end(),
      [](const ScenarioScore& a, const ScenarioScore& b) { return a.score < b.score; });
  if (s.n > 1 && lo->score != hi->score) {
    double ss = 0.0;
    for (const auto& sc : s.per_scenario_scores) ss += (sc.score - s.mean) * (sc.score - s.mean);
    s.se = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  s.label = orientation_label(s.mean, experimental_pole, reference_pole);
  return s;
}

ScoreSummary score_scenarios(const ReadingVector& v, const std::vector<UnframedVector>& unframed,
                             const ScenarioIdMap& scenario_of) {
  if (unframed.empty()) throw Error(ErrorKind::kEmptyInput, "no unframed records to score");
  std::vector<ScenarioScore> scores;
  scores.reserve(unframed.size());
  for (const auto& u : unframed) {
    const std::uint32_t id = scenario_of ? scenario_of(u.prompt_id) : u.prompt_id;
    scores.push_back({id, normalize_score(project(v, u.activation), v)});
  }
  return summarize_scores(v.contrast_name, std::move(scores), v.experimental_pole, v.reference_pole);
}

std::string orientation_label(double mean_score, const std::string& experimental_pole,
                              const std::string& reference_pole) {
  const double d = mean_score - 0.5;
  // Bin edges are decimal; absorb the rounding in mean - 0.5 so 0.7 lands on 0.20.
  const double mag = std::abs(d) + 1e-12;
  if (mag < 0.02) return "near center";
  const std::string& pole = d > 0.0 ? experimental_pole : reference_pole;
  if (mag < 0.10) return "slightly " + pole;
  if (mag < 0.20) return pole;
  return "strongly " + pole;
}

std::string csv_header() { return "contrast,mean,se,n,label"; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv_row(const ScoreSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%u,", s.mean, s.se, s.n);
  return csv_field(s.contrast_name) + buf + csv_field(s.label);
}

nlohmann::json to_json(const ScoreSummary& s) {
  nlohmann::json j;
  j["contrast_name"] = s.contrast_name;
  j["mean"] = s.mean;
  j["se"] = s.se;
  j["n"] = s.n;
  j["label"] = s.label;
  auto rows = nlohmann::json::array();
  for (const auto& sc : s.per_scenario_scores) {
    rows.push_back({{"scenario_id", sc.scenario_id}, {"score", sc.score}});
  }
  j["per_scenario_scores"] = std::move(rows);
  return j;
}

ScoreSummary score_summary_from_json(const nlohmann::json& j) {
  ScoreSummary s;
  try {
    s.contrast_name = j.at("contrast_name").get<std::string>();
    s.mean = j.at("mean").get<double>();
    s.se = j.at("se").get<double>();
    s.n = j.at("n").get<std::uint32_t>();
    s.label = j.at("label").get<std::string>();
    for (const auto& r : j.at("per_scenario_scores")) {
      s.per_scenario_scores.push_back({r.at("scenario_id").get<std::uint32_t>(), r.at("score").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad score summary: ") + e.what());
  }
  return s;
}

}  // namespace repread
