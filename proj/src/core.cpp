#include "repread/core.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "repread/error.hpp"
#include "repread/io.hpp"
#include "repread/rng.hpp"

namespace repread {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvalidLayer: return "invalid-layer";
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kInvalidSplit: return "invalid-split";
    case ErrorKind::kDatasetTooSmall: return "dataset-too-small";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kVersionMismatch: return "version-mismatch";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kHashMismatch: return "hash-mismatch";
    case ErrorKind::kMissingCondition: return "missing-condition";
    case ErrorKind::kDegenerateData: return "degenerate-data";
    case ErrorKind::kDegenerateAnchors: return "degenerate-anchors";
    case ErrorKind::kMissingInput: return "missing-input";
  }
  return "unknown";
}

double Rng64::uniform() noexcept {
  constexpr double kScale = 0x1.0p-53;
  const double u = static_cast<double>(next() >> 11) * kScale;
  return u == 0.0 ? kScale : u;
}

double Rng64::gaussian() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view to_string(TemplateId id) {
  return id == TemplateId::kSituation ? "situation" : "statement";
}

TemplateId template_from_string(std::string_view name) {
  if (name == "situation") return TemplateId::kSituation;
  if (name == "statement") return TemplateId::kStatement;
  throw Error(ErrorKind::kInvalidConfig, "unknown template_id '" + std::string(name) + "'");
}

LayerRequest LayerRequest::parse(std::string_view text) {
  if (text == "auto") return automatic();
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorKind::kInvalidLayer, "layer must be an integer or 'auto', got '" +
                                              std::string(text) + "'");
  }
  return explicit_index(value);
}

std::string LayerRequest::str() const { return index ? std::to_string(*index) : "auto"; }

int resolve_layer(int n_layers, const LayerRequest& requested) {
  if (n_layers < 2) {
    throw Error(ErrorKind::kInvalidLayer, "model must have at least 2 layers");
  }
  if (requested.is_auto()) {
    // round_half_up(0.33 * n) in integer arithmetic
    const int depth = (33 * n_layers + 50) / 100;
    return -std::max(1, depth);
  }
  const int idx = *requested.index;
  if (idx >= 0 || -idx > n_layers) {
    throw Error(ErrorKind::kInvalidLayer, "layer " + std::to_string(idx) +
                                              " is not a valid index from the end for " +
                                              std::to_string(n_layers) + " layers");
  }
  return idx;
}

void ProbeConfig::validate() const {
  if (experimental_token.empty() || reference_token.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "identity tokens must be non-empty");
  }
  if (contrast_name.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "contrast_name must be non-empty");
  }
  if (layer.index && *layer.index >= 0) {
    throw Error(ErrorKind::kInvalidLayer, "layer must be negative (counted from the end) or auto");
  }
}

void ProbeConfig::validate_for(std::size_t n_pairs) const {
  validate();
  if (static_cast<std::size_t>(n_train) + n_test != n_pairs) {
    throw Error(ErrorKind::kInvalidSplit,
                "n_train + n_test = " + std::to_string(n_train + n_test) +
                    " does not match " + std::to_string(n_pairs) + " contrast pairs");
  }
}

nlohmann::json to_json(const ProbeConfig& c) {
  nlohmann::json j;
  j["contrast_name"] = c.contrast_name;
  j["experimental_token"] = c.experimental_token;
  j["reference_token"] = c.reference_token;
  j["template_id"] = to_string(c.template_id);
  if (c.layer.index) {
    j["layer"] = *c.layer.index;
  } else {
    j["layer"] = "auto";
  }
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["split_seed"] = c.split_seed;
  j["model_id"] = c.model_id;
  return j;
}

ProbeConfig probe_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "config must be a JSON object");
  static const std::set<std::string> kKnown = {
      "contrast_name", "experimental_token", "reference_token", "template_id", "layer",
      "n_train",       "n_test",             "split_seed",      "model_id"};
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.contains(key)) throw Error(ErrorKind::kInvalidConfig, "unknown key '" + key + "'");
  }
  ProbeConfig c;
  try {
    c.contrast_name = j.at("contrast_name").get<std::string>();
    c.experimental_token = j.at("experimental_token").get<std::string>();
    c.reference_token = j.at("reference_token").get<std::string>();
    if (j.contains("template_id")) {
      c.template_id = template_from_string(j["template_id"].get<std::string>());
    }
    if (j.contains("layer")) {
      const auto& layer = j["layer"];
      c.layer = layer.is_string() ? LayerRequest::parse(layer.get<std::string>())
                                  : LayerRequest::explicit_index(layer.get<int>());
    }
    if (j.contains("n_train")) c.n_train = j["n_train"].get<std::uint32_t>();
    if (j.contains("n_test")) c.n_test = j["n_test"].get<std::uint32_t>();
    if (j.contains("split_seed")) c.split_seed = j["split_seed"].get<std::uint64_t>();
    if (j.contains("model_id")) c.model_id = j["model_id"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

ProbeConfig load_probe_config(const std::filesystem::path& path) {
  return probe_config_from_json(read_json_file(path));
}

void save_probe_config(const ProbeConfig& config, const std::filesystem::path& path) {
  write_text_file(path, to_json(config).dump(2) + "\n");
}

std::string slugify(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char ch : name) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '-' || ch == '.';
    out.push_back(keep ? ch : '_');
  }
  return out;
}

}  // namespace repread
