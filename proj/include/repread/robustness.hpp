#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "repread/reading_vector.hpp"
#include "repread/scoring.hpp"

namespace repread {

/// Accuracy of the vector trained on contrast i (row) over the held-out
/// pairs of contrast j (column).
struct GeneralizationMatrix {
  std::vector<std::string> contrast_names;
  std::vector<std::string> column_labels;
  Eigen::MatrixXd accuracy;

  bool diagonal(std::size_t row, std::size_t col) const {
    return contrast_names[row] == contrast_names[col];
  }
};

GeneralizationMatrix cross_contrast_matrix(
    const std::vector<ReadingVector>& vectors,
    const std::map<std::string, std::vector<PairedVectors>>& test_sets);

std::string to_csv(const GeneralizationMatrix& m);
/// Fixed-width table, diagonal cells starred.
std::string to_text_table(const GeneralizationMatrix& m);
nlohmann::json to_json(const GeneralizationMatrix& m);
GeneralizationMatrix generalization_matrix_from_json(const nlohmann::json& j);

struct AblationReport {
  std::string vector_name;
  double full_mean = 0.0;
  std::vector<double> subset_means;
  double lo = 0.0;
  double hi = 0.0;
  double std = 0.0;  // spread of subset means, denominator n_subsets - 1
  std::uint32_t flips = 0;
  std::uint32_t k = 0;
  std::uint32_t n_subsets = 0;
  std::uint64_t seed = 0;
  double threshold = 0.5;
};

/// Draw s removes k scenarios chosen by a partial Fisher-Yates shuffle under
/// Rng64(seed + s). A flip is a subset mean on the other side of the
/// threshold from the full mean.
AblationReport leave_k_out(const std::vector<ScenarioScore>& scores, std::uint32_t k,
                           std::uint32_t n_subsets, std::uint64_t seed, double threshold = 0.5);

/// Every size-k removal exactly once, in lexicographic order of removed indices.
AblationReport leave_k_out_exhaustive(const std::vector<ScenarioScore>& scores, std::uint32_t k,
                                      double threshold = 0.5);

/// Columns: Vector, Mean, L5O range, L5O std, Flips.
std::string to_markdown(const std::vector<AblationReport>& reports);
std::string to_csv(const std::vector<AblationReport>& reports);
nlohmann::json to_json(const AblationReport& r);
AblationReport ablation_report_from_json(const nlohmann::json& j);

struct TokenRobustnessRow {
  std::string label;
  double mean = 0.0;
  double se = 0.0;
};

struct TokenDeviation {
  std::string a;
  std::string b;
  double abs_diff = 0.0;
};

struct TokenRobustnessTable {
  std::vector<TokenRobustnessRow> rows;
  std::vector<TokenDeviation> deviations;  // every unordered pair, i < j
  double max_deviation = 0.0;
};

TokenRobustnessTable token_robustness(const std::vector<std::pair<std::string, ScoreSummary>>& results);

std::string to_markdown(const TokenRobustnessTable& t);
std::string to_csv(const TokenRobustnessTable& t);
nlohmann::json to_json(const TokenRobustnessTable& t);
TokenRobustnessTable token_robustness_from_json(const nlohmann::json& j);

}  // namespace repread
