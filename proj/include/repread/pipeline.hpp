#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "repread/dataset.hpp"
#include "repread/reading_vector.hpp"

namespace repread {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Stage { kBuild, kVectors, kScores, kRobustness, kReport };

std::string_view to_string(Stage s);

struct RunPlan {
  std::filesystem::path config_path;
  std::filesystem::path token_pairs_path;  // empty: the config's single contrast
  std::filesystem::path scenarios_path;
  std::filesystem::path test_scenarios_path;
  std::filesystem::path facts_path;  // empty: no honesty benchmark
  /// contrast name -> dump paths (several paths = several models).
  std::map<std::string, std::vector<std::filesystem::path>> dumps;
  std::filesystem::path out_dir;
  std::set<Stage> stages;

  std::optional<LayerRequest> layer_override;
  std::optional<std::uint64_t> split_seed_override;
  bool eval_all_pairs = false;
  DifferenceCentering centering = DifferenceCentering::kNone;

  std::size_t honesty_train_pairs = 512;
  std::size_t honesty_test_pairs = 256;
  std::uint64_t honesty_seed = 0;

  std::uint32_t ablation_k = 5;
  std::uint32_t ablation_subsets = 200;

  /// When set, the build stage also writes synthetic planted dumps for every
  /// prompt set under <out>/dumps (the stand-in for a model extractor).
  std::optional<std::filesystem::path> synthetic_spec_path;
  bool synthesize = false;
};

/// Every prompt the extractor must run for one contrast, plus its split.
struct PromptSet {
  TokenPair contrast;
  TemplateId template_id = TemplateId::kSituation;
  std::vector<ContrastPair> pairs;
  SplitAssignment split;
  std::vector<Scenario> unframed;
};

struct PromptRow {
  std::uint32_t prompt_id = 0;
  std::uint32_t pair_id = 0;
  Condition condition = Condition::kUnframed;
  std::string text;
};

/// Experimental prompt of pair p is 2p, reference 2p+1, unframed scenario s
/// follows the pairs at 2*n_pairs + s.
std::vector<PromptRow> prompt_rows(const PromptSet& set);
std::map<std::uint32_t, std::string> prompt_hashes(const PromptSet& set);
/// One JSON object per line: prompt_id, pair_id, condition, text.
std::string to_jsonl(const std::vector<PromptRow>& rows);

/// Deterministic function of the plan's inputs; no files are written.
std::vector<PromptSet> build_prompt_sets(const RunPlan& plan);

struct RunResult {
  int status = 0;
  std::string message;
};

/// Runs the requested stages in order. A failing stage aborts the run with a
/// nonzero status and a "<stage>: ..." message.
RunResult run(const RunPlan& plan, std::ostream& log);

/// Directory holding the shipped stimulus files.
std::filesystem::path default_data_dir();

}  // namespace repread
