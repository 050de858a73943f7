// Acceptance checks for the primary component. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>

#include "repread/actdump.hpp"
#include "repread/dataset.hpp"
#include "repread/error.hpp"
#include "repread/io.hpp"
#include "repread/pipeline.hpp"
#include "repread/reading_vector.hpp"
#include "repread/robustness.hpp"
#include "repread/scoring.hpp"
#include "repread/synthetic.hpp"

using namespace repread;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

fs::path scratch(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("repread_acceptance_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SyntheticSpec pinned_spec() {
  SyntheticSpec s;  // d=128, 100 pairs, delta 1, sigma_noise 0.1, sigma_base 1, seed 7
  s.n_unframed = 0;
  return s;
}

PairedActivations split_pairs(const ActivationDump& dump, const SyntheticSpec& s) {
  return join_pairs(dump, split_train_test(s.n_pairs, 20, 42), s.layer_index);
}

Vec eigen_oracle(const std::vector<PairedVectors>& pairs) {
  const auto dim = pairs.front().experimental.size();
  Eigen::MatrixXd d(static_cast<Eigen::Index>(pairs.size()), dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    d.row(static_cast<Eigen::Index>(i)) = (pairs[i].experimental - pairs[i].reference).transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.transpose() * d);
  return es.eigenvectors().col(dim - 1);
}

Outcome planted_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = pinned_spec();
  const auto gen = generate_synthetic(spec);
  const auto pairs = split_pairs(gen.dump, spec);
  const auto v = extract_reading_vector(pairs.train);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double cos = std::abs(v.direction.dot(gen.truth.planted_direction));

  double worst = 1.0;
  for (std::uint32_t dim : {4u, 8u, 16u, 32u}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto s = pinned_spec();
      s.hidden_dim = dim;
      s.seed = seed;
      s.sigma_noise = 0.5;
      const auto g = generate_synthetic(s);
      const auto p = split_pairs(g.dump, s);
      const auto w = extract_reading_vector(p.train);
      worst = std::min(worst, std::abs(w.direction.dot(eigen_oracle(p.train))));
    }
  }
  return {cos >= 0.99 && worst >= 1.0 - 1e-9 && secs < 5.0,
          "|cos(v,u)|=" + fmt("%.6f", cos) + " (>=0.99), min oracle |cos| d<=32: 1-" + fmt("%.2e", 1.0 - worst) +
              " (<=1e-9), runtime " + fmt("%.3f", secs) + "s (<5s)"};
}

Outcome classification_ci() {
  auto spec = pinned_spec();
  spec.sigma_noise = 0.0;
  const auto gen = generate_synthetic(spec);
  const auto pairs = split_pairs(gen.dump, spec);
  const auto v = extract_reading_vector(pairs.train);
  const auto r = classify_pairs(v, pairs.test);
  const auto [lo10, hi10] = clopper_pearson(10, 20, 0.95);
  // Frozen from an independent statistics library, and Boost as a second oracle.
  const double ref_lo = 0.27195784956079183;
  const double ref_hi = 0.7280421504392081;
  const double boost_lo = boost::math::ibeta_inv(10.0, 11.0, 0.025);
  const double boost_hi = boost::math::ibeta_inv(11.0, 10.0, 0.975);
  const bool ok = r.n_correct == 20 && r.n_total == 20 && std::abs(r.ci_low - 0.8316) <= 1e-3 &&
                  std::abs(r.ci_high - 1.0) <= 1e-3 && std::abs(lo10 - ref_lo) <= 1e-3 &&
                  std::abs(hi10 - ref_hi) <= 1e-3 && std::abs(lo10 - boost_lo) <= 1e-3 &&
                  std::abs(hi10 - boost_hi) <= 1e-3;
  return {ok, std::to_string(r.n_correct) + "/" + std::to_string(r.n_total) + " CI (" + fmt("%.4f", r.ci_low) + ", " +
                  fmt("%.4f", r.ci_high) + "); CP(10,20)=(" + fmt("%.6f", lo10) + ", " + fmt("%.6f", hi10) + ")"};
}

Outcome score_normalization() {
  auto spec = pinned_spec();
  spec.n_unframed = 3;
  spec.unframed_coeffs = {-spec.delta, 0.0, spec.delta};
  const auto gen = generate_synthetic(spec);
  const auto pairs = split_pairs(gen.dump, spec);
  const auto v = extract_reading_vector(pairs.train);
  const auto s = score_scenarios(v, unframed_vectors(gen.dump, spec.layer_index));

  double worst = 0.0;
  std::string scores;
  for (std::size_t i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(s.per_scenario_scores[i].score - gen.truth.expected_scores[i]));
    scores += (i ? "/" : "") + fmt("%.4f", s.per_scenario_scores[i].score);
  }
  const double anchor_err = std::max(std::abs(normalize_score(v.mu_ref, v)), std::abs(normalize_score(v.mu_exp, v) - 1.0));
  // Anchors against their own train projections, recomputed independently.
  double pe = 0.0;
  double pr = 0.0;
  for (const auto& p : pairs.train) {
    pe += project(v, p.experimental);
    pr += project(v, p.reference);
  }
  pe /= pairs.train.size();
  pr /= pairs.train.size();
  const double own_err = std::max(std::abs(normalize_score(pr, v)), std::abs(normalize_score(pe, v) - 1.0));
  return {worst <= 0.02 && anchor_err <= 1e-12 && own_err <= 1e-12,
          "scores " + scores + " vs 0/0.5/1, max err " + fmt("%.4f", worst) + " (<=0.02); anchor err " +
              fmt("%.1e", std::max(anchor_err, own_err)) + " (<=1e-12)"};
}

Outcome ablation_oracle() {
  const std::vector<double> xs = {0.43, 0.58, 0.49, 0.61, 0.37, 0.66, 0.51};
  std::vector<ScenarioScore> scores;
  for (std::size_t i = 0; i < xs.size(); ++i) scores.push_back({static_cast<std::uint32_t>(i + 1), xs[i]});
  const auto r = leave_k_out_exhaustive(scores, 2);

  // Brute force over 7-bit masks with two bits set.
  const double full = std::accumulate(xs.begin(), xs.end(), 0.0) / 7.0;
  std::vector<double> means;
  for (unsigned mask = 0; mask < 128; ++mask) {
    if (__builtin_popcount(mask) != 2) continue;
    double sum = 0.0;
    for (unsigned i = 0; i < 7; ++i) {
      if (!(mask >> i & 1u)) sum += xs[i];
    }
    means.push_back(sum / 5.0);
  }
  const double lo = *std::min_element(means.begin(), means.end());
  const double hi = *std::max_element(means.begin(), means.end());
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / (means.size() - 1));
  std::uint32_t flips = 0;
  for (double x : means) flips += (x > 0.5) != (full > 0.5);

  const auto k0 = leave_k_out(scores, 0, 200, 42);
  const bool k0_ok = k0.std == 0.0 && k0.flips == 0 && k0.lo == k0.full_mean && k0.hi == k0.full_mean;
  const bool ok = r.n_subsets == 21 && means.size() == 21 && r.lo == lo && r.hi == hi &&
                  std::abs(r.std - sd) <= 1e-15 && r.flips == flips && k0_ok;
  return {ok, "21 subsets, range [" + fmt("%.4f", r.lo) + ", " + fmt("%.4f", r.hi) + "] std " + fmt("%.6f", r.std) +
                  " flips " + std::to_string(r.flips) + " vs oracle [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
                  "] std " + fmt("%.6f", sd) + " flips " + std::to_string(flips) + "; k=0 " +
                  (k0_ok ? "zero spread, 0 flips" : "NONZERO")};
}

Outcome cross_contrast() {
  const auto dir = scratch("matrix");
  write_text_file(dir / "spec.json", R"({"sigma_noise": 0.1, "sigma_base": 1.0})");
  RunPlan plan;
  plan.config_path = default_data_dir() / "probe_config.json";
  plan.token_pairs_path = dir / "category.json";
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& tp : load_token_pairs(default_data_dir() / "token_pairs.json")) {
    if (tp.group == "category") {
      tokens.push_back({{"contrast_name", tp.contrast_name}, {"experimental", tp.experimental},
                        {"reference", tp.reference}, {"group", tp.group}});
    }
  }
  write_text_file(plan.token_pairs_path, tokens.dump(2));
  plan.out_dir = dir / "out";
  plan.stages = {Stage::kBuild, Stage::kVectors, Stage::kRobustness};
  plan.synthesize = true;
  plan.synthetic_spec_path = dir / "spec.json";
  // Robustness also runs ablation, which needs scores.
  plan.stages.insert(Stage::kScores);
  std::ostringstream log;
  const auto res = run(plan, log);
  if (res.status != 0) return {false, res.message};
  const auto m = generalization_matrix_from_json(
      read_json_file(plan.out_dir / "robustness/cross_contrast__synthetic-planted.json").at("matrix"));
  const auto cells = m.accuracy.size();
  const long perfect = (m.accuracy.array() == 1.0).count();
  fs::remove_all(dir);
  return {cells == 64 && perfect == 64,
          std::to_string(perfect) + "/" + std::to_string(cells) + " cells = 1.000 over " +
              std::to_string(m.contrast_names.size()) + " contrasts sharing one planted direction"};
}

std::string statement(std::size_t n_tokens, std::size_t tag) {
  std::string s;
  for (std::size_t i = 0; i < n_tokens; ++i) s += (i ? " " : "") + ("w" + std::to_string(tag) + "_" + std::to_string(i));
  return s;
}

Outcome honesty_construction() {
  const auto v10 = truncate_statement(statement(10, 0)).size();
  const auto v12 = truncate_statement(statement(12, 0)).size();
  const auto v15 = truncate_statement(statement(15, 0)).size();

  std::vector<Statement> facts;
  for (std::uint32_t i = 0; i < 240; ++i) facts.push_back({i, statement(10 + i % 6, i), i % 3 != 2});
  const auto hs = build_honesty_set(facts, 512, 256, 0);
  bool matched = true;
  for (const auto& p : hs.train) {
    matched = matched && p.honest_statement == p.untruthful_statement &&
              p.honest_prompt.find(p.honest_statement) != std::string::npos &&
              p.untruthful_prompt.find(p.untruthful_statement) != std::string::npos;
  }
  bool crossed = true;
  for (std::size_t j = 0; j < hs.test.size(); ++j) {
    crossed = crossed && hs.test[j].honest_statement != hs.test[j].untruthful_statement &&
              hs.test[j].untruthful_statement == hs.test[(j + 1) % hs.test.size()].honest_statement;
  }
  const bool ok = v10 == 5 && v12 == 7 && v15 == 10 && hs.train.size() == 512 && hs.test.size() == 256 && matched && crossed;
  return {ok, "variants 10/12/15 tokens -> " + std::to_string(v10) + "/" + std::to_string(v12) + "/" +
                  std::to_string(v15) + "; pairs " + std::to_string(hs.train.size()) + " train + " +
                  std::to_string(hs.test.size()) + " test; train matched: " + (matched ? "yes" : "no") +
                  "; test cross-paired: " + (crossed ? "yes" : "no")};
}

bool rejects(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

Outcome actd_format() {
  // Fixed records whose encoding was digested by an independent writer.
  DumpManifest m;
  m.model_id = "fixture";
  m.n_layers_total = 4;
  m.stored_layer_indices = {-2, -1};
  m.hidden_dim = 3;
  const std::vector<ActivationRecord> recs = {
      {0, Condition::kExperimental, 0, {0.5f, -1.25f, 2.0f, 3.5f, 0.0f, -8.0f}},
      {1, Condition::kReference, 0, {1, 2, 3, 4, 5, 6}},
      {2, Condition::kUnframed, kUnframedPairId, {0.1f, 0.2f, 0.3f, -0.1f, -0.2f, -0.3f}}};
  const bool golden = sha256_hex(encode_dump(recs, m)) == "6b1a305b52e76356b9da444bf486dca88c0f5dad5c01bd9acc6fa5369e22c660";

  const auto dir = scratch("actd");
  auto spec = pinned_spec();
  spec.n_unframed = 35;
  spec.unframed_coeffs.assign(35, 0.25);
  write_synthetic_dump(spec, dir / "d.actd");
  const auto raw = read_text_file(dir / "d.actd");
  const auto back = read_dump(dir / "d.actd");
  const auto again = encode_dump(back.records, back.manifest);
  const bool round_trip = raw == std::string(again.begin(), again.end()) &&
                          back.records == generate_synthetic(spec).dump.records;

  std::vector<unsigned char> bytes(raw.begin(), raw.end());
  auto bad_magic = bytes;
  bad_magic[1] = 'X';
  auto cut = bytes;
  cut.resize(bytes.size() - 7);
  const bool corrupt = rejects([&] { decode_dump(bad_magic); }, ErrorKind::kBadMagic) &&
                       rejects([&] { decode_dump(cut); }, ErrorKind::kTruncated);
  fs::remove_all(dir);
  return {golden && round_trip && corrupt, std::string("golden sha256 ") + (golden ? "matches" : "DIFFERS") +
                                               "; write/read/write " + (round_trip ? "byte-exact" : "NOT exact") +
                                               "; bad magic + truncation " + (corrupt ? "rejected" : "ACCEPTED")};
}

std::map<std::string, std::string> digest_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = sha256_file(e.path());
  }
  return out;
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  RunPlan plan;
  plan.config_path = default_data_dir() / "probe_config.json";
  plan.token_pairs_path = default_data_dir() / "token_pairs.json";
  plan.out_dir = dir / "out";
  plan.stages = {Stage::kBuild, Stage::kVectors, Stage::kScores, Stage::kRobustness, Stage::kReport};
  plan.synthesize = true;
  std::ostringstream log;

  std::vector<std::map<std::string, std::string>> tables;
  std::vector<std::string> summaries;
  for (int i = 0; i < 2; ++i) {
    const auto r = run(plan, log);
    if (r.status != 0) return {false, r.message};
    tables.push_back(digest_tree(plan.out_dir / "tables"));
    summaries.push_back(sha256_file(plan.out_dir / "run_summary.json"));
  }
  // A second output directory must not change any byte either.
  plan.out_dir = dir / "elsewhere";
  if (run(plan, log).status != 0) return {false, "relocated run failed"};
  const bool relocated = digest_tree(plan.out_dir / "tables") == tables[0] &&
                         sha256_file(plan.out_dir / "run_summary.json") == summaries[0];
  fs::remove_all(dir);
  const bool ok = tables[0] == tables[1] && summaries[0] == summaries[1] && relocated && !tables[0].empty();
  return {ok, std::to_string(tables[0].size()) + " table files and run_summary.json " +
                  (tables[0] == tables[1] && summaries[0] == summaries[1] ? "identical" : "DIFFER") +
                  " across two runs; relocated output " + (relocated ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"planted-direction recovery", planted_recovery},
      {"classification and Clopper-Pearson interval", classification_ci},
      {"score normalization", score_normalization},
      {"ablation oracle", ablation_oracle},
      {"cross-contrast matrix", cross_contrast},
      {"honesty dataset construction", honesty_construction},
      {"ACTD format", actd_format},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
