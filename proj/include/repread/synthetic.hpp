#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "repread/actdump.hpp"

namespace repread {

/// Planted linear model: every pair straddles a hidden unit direction u by
/// +/- delta on top of a shared base, unframed scenarios sit at c_s along u.
struct SyntheticSpec {
  std::uint32_t hidden_dim = 128;
  std::uint32_t n_pairs = 100;
  std::uint32_t n_unframed = 35;
  double delta = 1.0;
  double sigma_noise = 0.1;
  double sigma_base = 1.0;
  std::vector<double> unframed_coeffs;
  std::uint64_t seed = 7;
  /// Draw u from its own stream so several dumps can share one direction.
  std::optional<std::uint64_t> direction_seed;

  std::string model_id = "synthetic-planted";
  std::uint32_t n_layers_total = 40;
  std::int32_t layer_index = -13;

  void validate() const;
};

nlohmann::json to_json(const SyntheticSpec& s);
/// Missing keys keep their defaults; unknown keys are rejected.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

struct GroundTruth {
  Vec planted_direction;
  std::vector<double> expected_scores;  // (c_s + delta) / (2 delta)
};

struct SyntheticDump {
  ActivationDump dump;
  GroundTruth truth;
};

double expected_score(double coeff, double delta);

/// Records are ordered experimental(2i), reference(2i+1) per pair, then
/// unframed scenarios with prompt ids 2*n_pairs + s. When prompt_texts is
/// given (one per prompt id) the manifest hashes those texts.
SyntheticDump generate_synthetic(const SyntheticSpec& spec,
                                 const std::vector<std::string>* prompt_texts = nullptr);

/// Writes the dump, its manifest and "<path>.ground_truth.json".
GroundTruth write_synthetic_dump(const SyntheticSpec& spec, const std::filesystem::path& path,
                                 const std::vector<std::string>* prompt_texts = nullptr);

nlohmann::json to_json(const GroundTruth& g);

}  // namespace repread
