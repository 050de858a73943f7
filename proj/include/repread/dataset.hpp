#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "repread/core.hpp"

namespace repread {

/// A scenario rendered under the experimental and the reference identity
/// token. The two prompts differ only in the token substring.
struct ContrastPair {
  std::uint32_t pair_id = 0;
  std::uint32_t scenario_id = 0;
  std::string experimental_prompt;
  std::string reference_prompt;
};

struct SplitAssignment {
  std::vector<std::uint32_t> train_pair_ids;
  std::vector<std::uint32_t> test_pair_ids;
  std::uint64_t seed = 0;
};

struct HonestyPair {
  std::uint32_t pair_id = 0;
  std::string honest_prompt;
  std::string untruthful_prompt;
  std::uint32_t source_statement_id = 0;  // statement behind the honest prompt
  std::uint32_t truncation_length = 0;
  std::string honest_statement;
  std::string untruthful_statement;
};

struct HonestySet {
  std::vector<HonestyPair> train;
  std::vector<HonestyPair> test;
};

struct Statement {
  std::uint32_t id = 0;
  std::string text;
  bool label = false;
};

/// One experimental/reference token pair from a token-pair file.
struct TokenPair {
  std::string contrast_name;
  std::string experimental;
  std::string reference;
  std::string group;        // optional: category, structural, baseline, robustness, ...
  std::string primitive;    // optional: role, purpose, ...
  std::string compare_to;   // optional: contrast this one is a token alternative of
};

inline constexpr std::string_view kHonestToken = "an honest";
inline constexpr std::string_view kUntruthfulToken = "an untruthful";

/// "Pretend you're {token} person ..." followed by the scenario text.
/// Raw text only: chat templates are applied by the extractor.
std::string render_prompt(std::string_view scenario_text, std::string_view token,
                          TemplateId template_id);

std::vector<ContrastPair> build_contrast_set(const std::vector<Scenario>& scenarios,
                                             const ProbeConfig& config);

/// Fisher-Yates over pair ids driven by Rng64(seed); the last n_test
/// shuffled ids form the test split. Both id lists are returned sorted.
SplitAssignment split_train_test(std::size_t n_pairs, std::size_t n_test, std::uint64_t seed);

/// Whitespace-token prefixes of lengths 1..L-5, rejoined with single spaces.
std::vector<std::string> truncate_statement(std::string_view statement);

/// Builds the honesty benchmark: truncation variants of the true statements
/// are de-duplicated, shuffled with Rng64(seed), then split into train pairs
/// (same statement under both prefixes) and cross-paired test pairs (the
/// untruthful side takes the next statement in the test pool, wrapping).
HonestySet build_honesty_set(const std::vector<Statement>& statements, std::size_t n_train_pairs,
                             std::size_t n_test_pairs, std::uint64_t seed);

/// One scenario per line (blank lines skipped, ids 1..N), or a JSON list of
/// {id, text} objects.
std::vector<Scenario> load_scenarios(const std::filesystem::path& path, SetTag tag);
/// CSV with a header containing "statement" and "label" columns.
std::vector<Statement> load_statements(const std::filesystem::path& path);
std::vector<TokenPair> load_token_pairs(const std::filesystem::path& path);

/// Token without its leading article ("an independent" -> "independent").
std::string pole_name(std::string_view token);

}  // namespace repread
