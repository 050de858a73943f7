#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

namespace repread {

/// Activation-space vector. Stored activations are f32 on disk and widened
/// to double for all arithmetic.
using Vec = Eigen::VectorXd;

enum class TemplateId { kSituation, kStatement };

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);

enum class SetTag { kContrastive, kNaturalTest };

struct Scenario {
  std::uint32_t id = 0;
  std::string text;
  SetTag set_tag = SetTag::kContrastive;
};

/// Requested probe layer. An empty value means "auto" (proportional depth).
struct LayerRequest {
  std::optional<int> index;

  static LayerRequest automatic() { return {}; }
  static LayerRequest explicit_index(int i) { return {i}; }
  bool is_auto() const { return !index.has_value(); }

  static LayerRequest parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const LayerRequest&, const LayerRequest&) = default;
};

/// Resolves a layer request to a negative index counted from the top of the
/// decoder stack (-1 is the last block). "auto" selects the block at roughly
/// two thirds of the depth: max(1, round_half_up(0.33 * n_layers)) from the end.
int resolve_layer(int n_layers, const LayerRequest& requested);

struct ProbeConfig {
  std::string contrast_name;
  std::string experimental_token;  // article included, e.g. "a civic"
  std::string reference_token;
  TemplateId template_id = TemplateId::kSituation;
  LayerRequest layer;
  std::uint32_t n_train = 80;
  std::uint32_t n_test = 20;
  std::uint64_t split_seed = 42;
  std::string model_id;

  void validate() const;
  /// Additionally checks that the split sizes cover exactly n_pairs.
  void validate_for(std::size_t n_pairs) const;

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

nlohmann::json to_json(const ProbeConfig& config);
/// Rejects unknown keys and type mismatches.
ProbeConfig probe_config_from_json(const nlohmann::json& j);

ProbeConfig load_probe_config(const std::filesystem::path& path);
void save_probe_config(const ProbeConfig& config, const std::filesystem::path& path);

/// Filesystem-safe name for a contrast ("civic/independent" -> "civic_independent").
std::string slugify(std::string_view name);

}  // namespace repread
