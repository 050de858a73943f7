#include "repread/synthetic.hpp"

#include <set>

#include "repread/error.hpp"
#include "repread/io.hpp"
#include "repread/rng.hpp"

namespace repread {

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::kInvalidArgument, "synthetic spec: " + msg); };
  if (hidden_dim < 2) bad("hidden_dim must be at least 2");
  if (n_pairs < 1) bad("n_pairs must be positive");
  if (!(delta > 0.0)) bad("delta must be positive");
  if (!(sigma_noise >= 0.0) || !(sigma_base >= 0.0)) bad("sigmas must be non-negative");
  if (unframed_coeffs.size() != n_unframed) bad("unframed_coeffs must have n_unframed entries");
  if (layer_index >= 0 || static_cast<std::uint32_t>(-layer_index) > n_layers_total) {
    bad("layer_index outside the layer stack");
  }
}

nlohmann::json to_json(const SyntheticSpec& s) {
  nlohmann::json j;
  j["hidden_dim"] = s.hidden_dim;
  j["n_pairs"] = s.n_pairs;
  j["n_unframed"] = s.n_unframed;
  j["delta"] = s.delta;
  j["sigma_noise"] = s.sigma_noise;
  j["sigma_base"] = s.sigma_base;
  j["unframed_coeffs"] = s.unframed_coeffs;
  j["seed"] = s.seed;
  if (s.direction_seed) j["direction_seed"] = *s.direction_seed;
  j["model_id"] = s.model_id;
  j["n_layers_total"] = s.n_layers_total;
  j["layer_index"] = s.layer_index;
  return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {
      "hidden_dim", "n_pairs", "n_unframed",     "delta",          "sigma_noise", "sigma_base",
      "unframed_coeffs", "seed", "direction_seed", "model_id", "n_layers_total", "layer_index"};
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.contains(key)) throw Error(ErrorKind::kInvalidConfig, "unknown synthetic key '" + key + "'");
  }
  SyntheticSpec s;
  try {
    s.hidden_dim = j.value("hidden_dim", s.hidden_dim);
    s.n_pairs = j.value("n_pairs", s.n_pairs);
    s.n_unframed = j.value("n_unframed", s.n_unframed);
    s.delta = j.value("delta", s.delta);
    s.sigma_noise = j.value("sigma_noise", s.sigma_noise);
    s.sigma_base = j.value("sigma_base", s.sigma_base);
    s.unframed_coeffs = j.value("unframed_coeffs", s.unframed_coeffs);
    s.seed = j.value("seed", s.seed);
    if (j.contains("direction_seed")) s.direction_seed = j["direction_seed"].get<std::uint64_t>();
    s.model_id = j.value("model_id", s.model_id);
    s.n_layers_total = j.value("n_layers_total", s.n_layers_total);
    s.layer_index = j.value("layer_index", s.layer_index);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("synthetic spec: ") + e.what());
  }
  return s;
}

double expected_score(double coeff, double delta) { return (coeff + delta) / (2.0 * delta); }

namespace {

Vec gaussian_vector(Rng64& rng, Eigen::Index dim, double sigma) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = sigma * rng.gaussian();
  return v;
}

// Base spread lives in the orthogonal complement of u so that it never
// shifts a projection onto the planted direction.
Vec base_vector(Rng64& rng, const Vec& u, double sigma) {
  Vec g = gaussian_vector(rng, u.size(), sigma);
  g -= g.dot(u) * u;
  return g;
}

std::vector<float> to_floats(const Vec& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return out;
}

}  // namespace

SyntheticDump generate_synthetic(const SyntheticSpec& spec, const std::vector<std::string>* prompt_texts) {
  spec.validate();
  const auto dim = static_cast<Eigen::Index>(spec.hidden_dim);
  const std::size_t n_prompts = 2 * static_cast<std::size_t>(spec.n_pairs) + spec.n_unframed;
  if (prompt_texts != nullptr && prompt_texts->size() != n_prompts) {
    throw Error(ErrorKind::kInvalidArgument, "expected " + std::to_string(n_prompts) +
                                                 " prompt texts, got " + std::to_string(prompt_texts->size()));
  }

  Rng64 rng(spec.seed);
  Vec u;
  if (spec.direction_seed) {
    Rng64 dir_rng(*spec.direction_seed);
    u = gaussian_vector(dir_rng, dim, 1.0);
  } else {
    u = gaussian_vector(rng, dim, 1.0);
  }
  u.normalize();

  SyntheticDump out;
  auto& manifest = out.dump.manifest;
  manifest.model_id = spec.model_id;
  manifest.n_layers_total = spec.n_layers_total;
  manifest.stored_layer_indices = {spec.layer_index};
  manifest.hidden_dim = spec.hidden_dim;
  manifest.source_dtype = "f64";
  manifest.chat_template_note = "synthetic planted-direction data; no model or chat template";
  for (std::size_t id = 0; id < n_prompts; ++id) {
    const std::string text = prompt_texts != nullptr ? (*prompt_texts)[id]
                                                     : "synthetic prompt " + std::to_string(id);
    manifest.prompt_hashes.emplace(static_cast<std::uint32_t>(id), sha256_hex(text));
  }

  auto& records = out.dump.records;
  records.reserve(n_prompts);
  for (std::uint32_t i = 0; i < spec.n_pairs; ++i) {
    const Vec base = base_vector(rng, u, spec.sigma_base);
    const Vec noise_exp = gaussian_vector(rng, dim, spec.sigma_noise);
    const Vec noise_ref = gaussian_vector(rng, dim, spec.sigma_noise);
    records.push_back({2 * i, Condition::kExperimental, i, to_floats(base + spec.delta * u + noise_exp)});
    records.push_back({2 * i + 1, Condition::kReference, i, to_floats(base - spec.delta * u + noise_ref)});
  }
  for (std::uint32_t s = 0; s < spec.n_unframed; ++s) {
    const Vec base = base_vector(rng, u, spec.sigma_base);
    records.push_back({2 * spec.n_pairs + s, Condition::kUnframed, kUnframedPairId,
                       to_floats(base + spec.unframed_coeffs[s] * u)});
  }

  out.truth.planted_direction = u;
  for (double c : spec.unframed_coeffs) out.truth.expected_scores.push_back(expected_score(c, spec.delta));
  return out;
}

nlohmann::json to_json(const GroundTruth& g) {
  nlohmann::json j;
  j["u"] = std::vector<double>(g.planted_direction.begin(), g.planted_direction.end());
  j["expected_scores"] = g.expected_scores;
  return j;
}

GroundTruth write_synthetic_dump(const SyntheticSpec& spec, const std::filesystem::path& path,
                                 const std::vector<std::string>* prompt_texts) {
  auto generated = generate_synthetic(spec, prompt_texts);
  write_dump(generated.dump.records, generated.dump.manifest, path);
  auto gt_path = path;
  gt_path += ".ground_truth.json";
  write_text_file(gt_path, to_json(generated.truth).dump(2) + "\n");
  return std::move(generated.truth);
}

}  // namespace repread
