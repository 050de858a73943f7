#pragma once

// ACTD v1: final-token activations, one record per prompt.
//
//   header   "ACTD" | u32 version=1 | u32 hidden_dim | u32 n_layers
//            | i32 layer_index x n_layers | u64 n_records
//   record   u32 prompt_id | u8 condition | u32 pair_id
//            | f32 x (n_layers * hidden_dim), layer-major
//
// All integers and floats little-endian. A JSON manifest lives beside the
// binary at "<path>.manifest.json".

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repread/core.hpp"
#include "repread/dataset.hpp"

namespace repread {

inline constexpr std::uint32_t kActdVersion = 1;
inline constexpr std::uint32_t kUnframedPairId = 0xFFFFFFFFu;

enum class Condition : std::uint8_t { kReference = 0, kExperimental = 1, kUnframed = 2 };

std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view name);

struct ActivationRecord {
  std::uint32_t prompt_id = 0;
  Condition condition = Condition::kUnframed;
  std::uint32_t pair_id = kUnframedPairId;
  /// n_stored_layers * hidden_dim values, layer-major.
  std::vector<float> values;

  std::span<const float> layer(std::size_t layer_pos, std::size_t hidden_dim) const {
    return std::span(values).subspan(layer_pos * hidden_dim, hidden_dim);
  }

  friend bool operator==(const ActivationRecord&, const ActivationRecord&) = default;
};

struct DumpManifest {
  std::string model_id;
  std::uint32_t n_layers_total = 0;
  std::vector<std::int32_t> stored_layer_indices;  // negative, from the end
  std::uint32_t hidden_dim = 0;
  std::string storage_dtype = "f32";
  std::string source_dtype = "f32";
  std::map<std::uint32_t, std::string> prompt_hashes;  // prompt_id -> sha256 of raw text
  TemplateId template_id = TemplateId::kSituation;
  std::string chat_template_note;

  void validate() const;
  /// Position of a layer index within stored_layer_indices.
  std::size_t layer_position(int layer_index) const;

  friend bool operator==(const DumpManifest&, const DumpManifest&) = default;
};

nlohmann::json to_json(const DumpManifest& m);
DumpManifest manifest_from_json(const nlohmann::json& j);

struct ActivationDump {
  DumpManifest manifest;
  std::vector<ActivationRecord> records;
};

std::filesystem::path manifest_path_for(const std::filesystem::path& dump_path);

/// Serializes to the ACTD byte layout (no manifest).
std::vector<unsigned char> encode_dump(const std::vector<ActivationRecord>& records,
                                       const DumpManifest& manifest);

void write_dump(const std::vector<ActivationRecord>& records, const DumpManifest& manifest,
                const std::filesystem::path& path);

/// Reads and validates a dump plus its manifest. When expected_hashes is
/// given, every listed prompt must appear in the manifest with that hash.
ActivationDump read_dump(const std::filesystem::path& path,
                         const std::map<std::uint32_t, std::string>* expected_hashes = nullptr);

/// Decodes ACTD bytes alone; the manifest fields that the binary carries are
/// checked against `manifest` when given.
std::vector<ActivationRecord> decode_dump(std::span<const unsigned char> bytes,
                                          const DumpManifest* manifest = nullptr);

struct PairedVectors {
  std::uint32_t pair_id = 0;
  Vec experimental;
  Vec reference;
};

struct PairedActivations {
  std::vector<PairedVectors> train;
  std::vector<PairedVectors> test;
};

/// Pairs records by pair_id (never by position) at one stored layer.
/// Any split pair lacking either condition is an error naming the pair ids.
PairedActivations join_pairs(const ActivationDump& dump, const SplitAssignment& split,
                             int layer_index);

/// Same lookup for an explicit id list.
std::vector<PairedVectors> collect_pairs(const ActivationDump& dump,
                                         const std::vector<std::uint32_t>& pair_ids,
                                         int layer_index);

struct UnframedVector {
  std::uint32_t prompt_id = 0;
  Vec activation;
};

/// All unframed records at a layer, in file order.
std::vector<UnframedVector> unframed_vectors(const ActivationDump& dump, int layer_index);

}  // namespace repread
