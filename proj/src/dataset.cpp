#include "repread/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "repread/error.hpp"
#include "repread/io.hpp"
#include "repread/rng.hpp"

namespace repread {

std::string render_prompt(std::string_view scenario_text, std::string_view token,
                          TemplateId template_id) {
  std::string out = "Pretend you're ";
  out += token;
  out += template_id == TemplateId::kSituation ? " person responding to this situation. "
                                               : " person making statements about the world. ";
  out += scenario_text;
  return out;
}

std::vector<ContrastPair> build_contrast_set(const std::vector<Scenario>& scenarios,
                                             const ProbeConfig& config) {
  if (scenarios.empty()) throw Error(ErrorKind::kEmptyInput, "no contrastive scenarios");
  config.validate();
  std::vector<const Scenario*> ordered;
  ordered.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    if (s.set_tag != SetTag::kContrastive) {
      throw Error(ErrorKind::kInvalidArgument,
                  "scenario " + std::to_string(s.id) + " is not tagged contrastive");
    }
    ordered.push_back(&s);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Scenario* a, const Scenario* b) { return a->id < b->id; });

  std::vector<ContrastPair> pairs;
  pairs.reserve(ordered.size());
  for (const Scenario* s : ordered) {
    ContrastPair p;
    p.pair_id = static_cast<std::uint32_t>(pairs.size());
    p.scenario_id = s->id;
    p.experimental_prompt = render_prompt(s->text, config.experimental_token, config.template_id);
    p.reference_prompt = render_prompt(s->text, config.reference_token, config.template_id);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

SplitAssignment split_train_test(std::size_t n_pairs, std::size_t n_test, std::uint64_t seed) {
  if (n_test >= n_pairs) {
    throw Error(ErrorKind::kInvalidSplit, "n_test (" + std::to_string(n_test) +
                                              ") must be smaller than the number of pairs (" +
                                              std::to_string(n_pairs) + ")");
  }
  std::vector<std::uint32_t> ids(n_pairs);
  std::iota(ids.begin(), ids.end(), 0U);
  Rng64 rng(seed);
  for (std::size_t i = n_pairs - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(ids[i], ids[j]);
  }
  SplitAssignment split;
  split.seed = seed;
  const auto cut = ids.begin() + static_cast<std::ptrdiff_t>(n_pairs - n_test);
  split.train_pair_ids.assign(ids.begin(), cut);
  split.test_pair_ids.assign(cut, ids.end());
  std::sort(split.train_pair_ids.begin(), split.train_pair_ids.end());
  std::sort(split.test_pair_ids.begin(), split.test_pair_ids.end());
  return split;
}

namespace {

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

std::vector<std::string> truncate_statement(std::string_view statement) {
  const auto tokens = whitespace_tokens(statement);
  std::vector<std::string> out;
  if (tokens.size() < 6) return out;
  const std::size_t n_variants = tokens.size() - 5;
  out.reserve(n_variants);
  std::string prefix;
  for (std::size_t len = 1; len <= n_variants; ++len) {
    if (len > 1) prefix += ' ';
    prefix += tokens[len - 1];
    out.push_back(prefix);
  }
  return out;
}

HonestySet build_honesty_set(const std::vector<Statement>& statements, std::size_t n_train_pairs,
                             std::size_t n_test_pairs, std::uint64_t seed) {
  if (n_test_pairs == 1) {
    throw Error(ErrorKind::kInvalidArgument, "cross-pairing needs at least 2 test pairs");
  }
  struct Variant {
    std::uint32_t statement_id;
    std::uint32_t length;
    std::string text;
  };
  std::vector<Variant> pool;
  std::unordered_set<std::string> seen;
  for (const auto& st : statements) {
    if (!st.label) continue;
    auto variants = truncate_statement(st.text);
    for (std::size_t i = 0; i < variants.size(); ++i) {
      if (!seen.insert(variants[i]).second) continue;
      pool.push_back({st.id, static_cast<std::uint32_t>(i + 1), std::move(variants[i])});
    }
  }
  if (pool.size() < n_train_pairs + n_test_pairs) {
    throw Error(ErrorKind::kDatasetTooSmall,
                std::to_string(pool.size()) + " distinct truncation variants, need " +
                    std::to_string(n_train_pairs + n_test_pairs));
  }
  Rng64 rng(seed);
  for (std::size_t i = pool.size() - 1; i > 0; --i) {
    std::swap(pool[i], pool[static_cast<std::size_t>(rng.below(i + 1))]);
  }

  auto make = [](std::uint32_t pair_id, const Variant& honest, const Variant& untruthful) {
    HonestyPair p;
    p.pair_id = pair_id;
    p.honest_prompt = render_prompt(honest.text, kHonestToken, TemplateId::kStatement);
    p.untruthful_prompt = render_prompt(untruthful.text, kUntruthfulToken, TemplateId::kStatement);
    p.source_statement_id = honest.statement_id;
    p.truncation_length = honest.length;
    p.honest_statement = honest.text;
    p.untruthful_statement = untruthful.text;
    return p;
  };

  HonestySet set;
  set.train.reserve(n_train_pairs);
  set.test.reserve(n_test_pairs);
  for (std::size_t i = 0; i < n_train_pairs; ++i) {
    set.train.push_back(make(static_cast<std::uint32_t>(i), pool[i], pool[i]));
  }
  const std::size_t base = n_train_pairs;
  for (std::size_t j = 0; j < n_test_pairs; ++j) {
    const auto& honest = pool[base + j];
    const auto& untruthful = pool[base + (j + 1) % n_test_pairs];
    set.test.push_back(make(static_cast<std::uint32_t>(base + j), honest, untruthful));
  }
  return set;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path, SetTag tag) {
  const std::string text = read_text_file(path);
  std::vector<Scenario> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
      for (const auto& item : j) {
        out.push_back({item.at("id").get<std::uint32_t>(), item.at("text").get<std::string>(), tag});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kIo, "bad scenario JSON in '" + path.string() + "': " + e.what());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::uint32_t next_id = 1;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      out.push_back({next_id++, line, tag});
    }
  }
  std::set<std::uint32_t> ids;
  for (const auto& s : out) {
    if (!ids.insert(s.id).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate scenario id " + std::to_string(s.id));
    }
  }
  return out;
}

namespace {

// RFC 4180 style: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"': quoted = true; any = true; break;
      case ',': row.push_back(std::move(field)); field.clear(); any = true; break;
      case '\r': break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default: field += ch; any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool parse_label(const std::string& raw) {
  std::string v;
  for (char c : raw) {
    if (c != ' ') v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw Error(ErrorKind::kInvalidArgument, "unrecognized label '" + raw + "'");
}

}  // namespace

std::vector<Statement> load_statements(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_text_file(path));
  if (rows.empty()) throw Error(ErrorKind::kEmptyInput, "empty facts file '" + path.string() + "'");
  const auto& header = rows.front();
  const auto col = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorKind::kInvalidArgument, "facts file lacks a '" + std::string(name) + "' column");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t statement_col = col("statement");
  const std::size_t label_col = col("label");
  std::vector<Statement> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(statement_col, label_col)) {
      throw Error(ErrorKind::kInvalidArgument, "facts row " + std::to_string(r) + " is short");
    }
    out.push_back({static_cast<std::uint32_t>(r - 1), row[statement_col], parse_label(row[label_col])});
  }
  return out;
}

std::vector<TokenPair> load_token_pairs(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  if (!j.is_array()) throw Error(ErrorKind::kInvalidArgument, "token-pair file must be a JSON list");
  std::vector<TokenPair> out;
  std::set<std::string> names;
  try {
    for (const auto& item : j) {
      TokenPair tp;
      tp.contrast_name = item.at("contrast_name").get<std::string>();
      tp.experimental = item.at("experimental").get<std::string>();
      tp.reference = item.at("reference").get<std::string>();
      tp.group = item.value("group", "");
      tp.primitive = item.value("primitive", "");
      tp.compare_to = item.value("compare_to", "");
      if (tp.experimental.empty() || tp.reference.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "empty token in '" + tp.contrast_name + "'");
      }
      if (!names.insert(tp.contrast_name).second) {
        throw Error(ErrorKind::kInvalidArgument, "duplicate contrast '" + tp.contrast_name + "'");
      }
      out.push_back(std::move(tp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, "bad token-pair file: " + std::string(e.what()));
  }
  return out;
}

std::string pole_name(std::string_view token) {
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (token.starts_with(article)) return std::string(token.substr(article.size()));
  }
  return std::string(token);
}

}  // namespace repread
