#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repread/robustness.hpp"
#include "repread/scoring.hpp"

namespace repread {

/// One scored (contrast, model) unit as the report sees it.
struct ScoredContrast {
  std::string contrast_name;
  std::string group;
  std::string primitive;
  std::string experimental;
  std::string reference;
  std::string model_id;
  int layer = 0;
  ScoreSummary summary;
};

struct ReportInputs {
  std::vector<ScoredContrast> scores;
  std::vector<std::pair<std::string, GeneralizationMatrix>> matrices;  // keyed by model id
  std::vector<AblationReport> ablations;
  std::vector<std::pair<std::string, TokenRobustnessTable>> token_tables;  // keyed by base contrast
};

/// File name -> contents, all under tables/. Scores print with 3 decimals.
std::map<std::string, std::string> emit_tables(const ReportInputs& inputs);

/// "0.202 ± 0.012"
std::string format_score(double mean, double se);

}  // namespace repread
