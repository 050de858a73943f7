#include "repread/actdump.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "repread/error.hpp"
#include "repread/io.hpp"

namespace repread {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::kReference: return "reference";
    case Condition::kExperimental: return "experimental";
    case Condition::kUnframed: return "unframed";
  }
  return "unknown";
}

Condition condition_from_string(std::string_view name) {
  if (name == "reference") return Condition::kReference;
  if (name == "experimental") return Condition::kExperimental;
  if (name == "unframed") return Condition::kUnframed;
  throw Error(ErrorKind::kInvalidArgument, "unknown condition '" + std::string(name) + "'");
}

void DumpManifest::validate() const {
  if (hidden_dim == 0) throw Error(ErrorKind::kDimensionMismatch, "hidden_dim must be positive");
  if (stored_layer_indices.empty()) {
    throw Error(ErrorKind::kInvalidLayer, "manifest stores no layers");
  }
  for (auto idx : stored_layer_indices) {
    if (idx >= 0 || static_cast<std::int64_t>(-idx) > n_layers_total) {
      throw Error(ErrorKind::kInvalidLayer, "stored layer " + std::to_string(idx) +
                                                " outside [-" + std::to_string(n_layers_total) +
                                                ", -1]");
    }
  }
  if (storage_dtype != "f32") {
    throw Error(ErrorKind::kInvalidArgument, "storage_dtype must be f32, got " + storage_dtype);
  }
}

std::size_t DumpManifest::layer_position(int layer_index) const {
  const auto it = std::find(stored_layer_indices.begin(), stored_layer_indices.end(), layer_index);
  if (it == stored_layer_indices.end()) {
    throw Error(ErrorKind::kInvalidLayer,
                "layer " + std::to_string(layer_index) + " is not stored in this dump");
  }
  return static_cast<std::size_t>(it - stored_layer_indices.begin());
}

nlohmann::json to_json(const DumpManifest& m) {
  nlohmann::json j;
  j["format"] = "ACTD";
  j["version"] = kActdVersion;
  j["model_id"] = m.model_id;
  j["n_layers_total"] = m.n_layers_total;
  j["stored_layer_indices"] = m.stored_layer_indices;
  j["hidden_dim"] = m.hidden_dim;
  j["storage_dtype"] = m.storage_dtype;
  j["source_dtype"] = m.source_dtype;
  j["template_id"] = to_string(m.template_id);
  j["chat_template_note"] = m.chat_template_note;
  auto prompts = nlohmann::json::array();
  for (const auto& [id, hash] : m.prompt_hashes) {
    prompts.push_back({{"prompt_id", id}, {"sha256", hash}});
  }
  j["prompts"] = std::move(prompts);
  return j;
}

DumpManifest manifest_from_json(const nlohmann::json& j) {
  DumpManifest m;
  try {
    if (j.value("format", "ACTD") != "ACTD") {
      throw Error(ErrorKind::kBadMagic, "manifest format is not ACTD");
    }
    if (j.value("version", kActdVersion) != kActdVersion) {
      throw Error(ErrorKind::kVersionMismatch, "manifest version " + j["version"].dump());
    }
    m.model_id = j.at("model_id").get<std::string>();
    m.n_layers_total = j.at("n_layers_total").get<std::uint32_t>();
    m.stored_layer_indices = j.at("stored_layer_indices").get<std::vector<std::int32_t>>();
    m.hidden_dim = j.at("hidden_dim").get<std::uint32_t>();
    m.storage_dtype = j.value("storage_dtype", "f32");
    m.source_dtype = j.value("source_dtype", "f32");
    m.template_id = template_from_string(j.value("template_id", "situation"));
    m.chat_template_note = j.value("chat_template_note", "");
    for (const auto& p : j.value("prompts", nlohmann::json::array())) {
      const auto id = p.at("prompt_id").get<std::uint32_t>();
      if (!m.prompt_hashes.emplace(id, p.at("sha256").get<std::string>()).second) {
        throw Error(ErrorKind::kInvalidArgument,
                    "manifest lists prompt " + std::to_string(id) + " twice");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad manifest: ") + e.what());
  }
  m.validate();
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dump_path) {
  auto p = dump_path;
  p += ".manifest.json";
  return p;
}

namespace {

constexpr std::size_t kFixedHeaderBytes = 24;
constexpr std::size_t kRecordPrefixBytes = 9;

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<unsigned char>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

 private:
  std::vector<unsigned char>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> in) : in_(in) {}

  std::size_t remaining() const { return in_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorKind::kTruncated, "unexpected end of ACTD data");
  }

  std::span<const unsigned char> in_;
  std::size_t pos_ = 0;
};

void check_records(const std::vector<ActivationRecord>& records, const DumpManifest& manifest) {
  const std::size_t width = manifest.stored_layer_indices.size() * manifest.hidden_dim;
  for (const auto& r : records) {
    if (r.values.size() != width) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "record " + std::to_string(r.prompt_id) + " has " +
                      std::to_string(r.values.size()) + " values, expected " +
                      std::to_string(width));
    }
    if ((r.condition == Condition::kUnframed) != (r.pair_id == kUnframedPairId)) {
      throw Error(ErrorKind::kInvalidArgument, "record " + std::to_string(r.prompt_id) +
                                                   ": unframed records and only those carry "
                                                   "the sentinel pair id");
    }
    if (!std::all_of(r.values.begin(), r.values.end(), [](float v) { return std::isfinite(v); })) {
      throw Error(ErrorKind::kNonFinite, "record " + std::to_string(r.prompt_id) +
                                             " contains NaN or Inf");
    }
  }
}

}  // namespace

std::vector<unsigned char> encode_dump(const std::vector<ActivationRecord>& records,
                                       const DumpManifest& manifest) {
  manifest.validate();
  check_records(records, manifest);
  const std::size_t n_layers = manifest.stored_layer_indices.size();
  const std::size_t width = n_layers * manifest.hidden_dim;

  std::vector<unsigned char> out;
  out.reserve(kFixedHeaderBytes + 4 * n_layers +
              records.size() * (kRecordPrefixBytes + 4 * width));
  ByteWriter w(out);
  for (char c : {'A', 'C', 'T', 'D'}) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kActdVersion);
  w.u32(manifest.hidden_dim);
  w.u32(static_cast<std::uint32_t>(n_layers));
  for (auto idx : manifest.stored_layer_indices) w.i32(idx);
  w.u64(records.size());
  for (const auto& r : records) {
    w.u32(r.prompt_id);
    w.u8(static_cast<std::uint8_t>(r.condition));
    w.u32(r.pair_id);
    for (float v : r.values) w.f32(v);
  }
  return out;
}

void write_dump(const std::vector<ActivationRecord>& records, const DumpManifest& manifest,
                const std::filesystem::path& path) {
  const auto bytes = encode_dump(records, manifest);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  write_text_file(manifest_path_for(path), to_json(manifest).dump(2) + "\n");
}

std::vector<ActivationRecord> decode_dump(std::span<const unsigned char> bytes,
                                          const DumpManifest* manifest) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ACTD", 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "missing ACTD magic");
  }
  ByteReader r(bytes.subspan(4));
  const auto version = r.u32();
  if (version != kActdVersion) {
    throw Error(ErrorKind::kVersionMismatch, "unsupported ACTD version " + std::to_string(version));
  }
  const std::uint32_t hidden_dim = r.u32();
  const std::uint32_t n_layers = r.u32();
  std::vector<std::int32_t> layers(n_layers);
  for (auto& l : layers) l = r.i32();
  const std::uint64_t n_records = r.u64();

  if (manifest != nullptr) {
    if (manifest->hidden_dim != hidden_dim || manifest->stored_layer_indices != layers) {
      throw Error(ErrorKind::kDimensionMismatch, "ACTD header disagrees with manifest");
    }
  }
  const std::uint64_t record_bytes =
      kRecordPrefixBytes + 4ULL * static_cast<std::uint64_t>(n_layers) * hidden_dim;
  if (r.remaining() != n_records * record_bytes) {
    std::ostringstream msg;
    msg << "header declares " << n_records << " records (" << n_records * record_bytes
        << " bytes) but " << r.remaining() << " bytes follow";
    throw Error(ErrorKind::kTruncated, msg.str());
  }

  const std::size_t width = static_cast<std::size_t>(n_layers) * hidden_dim;
  std::vector<ActivationRecord> records(static_cast<std::size_t>(n_records));
  for (auto& rec : records) {
    rec.prompt_id = r.u32();
    const auto cond = r.u8();
    if (cond > 2) throw Error(ErrorKind::kInvalidArgument, "bad condition byte " + std::to_string(cond));
    rec.condition = static_cast<Condition>(cond);
    rec.pair_id = r.u32();
    rec.values.resize(width);
    for (auto& v : rec.values) {
      v = r.f32();
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kNonFinite,
                    "record " + std::to_string(rec.prompt_id) + " contains NaN or Inf");
      }
    }
  }
  return records;
}

ActivationDump read_dump(const std::filesystem::path& path,
                         const std::map<std::uint32_t, std::string>* expected_hashes) {
  const auto mpath = manifest_path_for(path);
  if (!std::filesystem::exists(mpath)) {
    throw Error(ErrorKind::kIo, "manifest '" + mpath.string() + "' not found");
  }
  ActivationDump dump;
  dump.manifest = manifest_from_json(read_json_file(mpath));
  const std::string raw = read_text_file(path);
  dump.records = decode_dump(
      std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()), &dump.manifest);

  const auto& table = dump.manifest.prompt_hashes;
  if (!table.empty()) {
    for (const auto& rec : dump.records) {
      if (!table.contains(rec.prompt_id)) {
        throw Error(ErrorKind::kHashMismatch,
                    "record prompt " + std::to_string(rec.prompt_id) + " is not in the manifest");
      }
    }
  }
  if (expected_hashes != nullptr) {
    std::vector<std::uint32_t> bad;
    for (const auto& [id, hash] : *expected_hashes) {
      const auto it = table.find(id);
      if (it == table.end() || it->second != hash) bad.push_back(id);
    }
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << bad.size() << " prompt(s) do not match the manifest, first id " << bad.front();
      throw Error(ErrorKind::kHashMismatch, msg.str());
    }
  }
  return dump;
}

namespace {

Vec to_vec(std::span<const float> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

}  // namespace

std::vector<PairedVectors> collect_pairs(const ActivationDump& dump,
                                         const std::vector<std::uint32_t>& pair_ids,
                                         int layer_index) {
  const std::size_t pos = dump.manifest.layer_position(layer_index);
  const std::size_t dim = dump.manifest.hidden_dim;

  struct Halves {
    const ActivationRecord* exp = nullptr;
    const ActivationRecord* ref = nullptr;
  };
  std::map<std::uint32_t, Halves> by_pair;
  for (const auto& rec : dump.records) {
    if (rec.condition == Condition::kUnframed) continue;
    auto& h = by_pair[rec.pair_id];
    auto& slot = rec.condition == Condition::kExperimental ? h.exp : h.ref;
    if (slot != nullptr) {
      throw Error(ErrorKind::kInvalidArgument, "pair " + std::to_string(rec.pair_id) + " has two " +
                                                   std::string(to_string(rec.condition)) +
                                                   " records");
    }
    slot = &rec;
  }

  std::vector<std::uint32_t> missing;
  std::vector<PairedVectors> out;
  out.reserve(pair_ids.size());
  for (auto id : pair_ids) {
    const auto it = by_pair.find(id);
    if (it == by_pair.end() || it->second.exp == nullptr || it->second.ref == nullptr) {
      missing.push_back(id);
      continue;
    }
    out.push_back({id, to_vec(it->second.exp->layer(pos, dim)), to_vec(it->second.ref->layer(pos, dim))});
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "pairs lacking a condition:";
    for (auto id : missing) msg << ' ' << id;
    throw Error(ErrorKind::kMissingCondition, msg.str());
  }
  return out;
}

PairedActivations join_pairs(const ActivationDump& dump, const SplitAssignment& split,
                             int layer_index) {
  return {collect_pairs(dump, split.train_pair_ids, layer_index),
          collect_pairs(dump, split.test_pair_ids, layer_index)};
}

std::vector<UnframedVector> unframed_vectors(const ActivationDump& dump, int layer_index) {
  const std::size_t pos = dump.manifest.layer_position(layer_index);
  std::vector<UnframedVector> out;
  for (const auto& rec : dump.records) {
    if (rec.condition != Condition::kUnframed) continue;
    out.push_back({rec.prompt_id, to_vec(rec.layer(pos, dump.manifest.hidden_dim))});
  }
  return out;
}

}  // namespace repread
