#include "repread/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "repread/error.hpp"
#include "repread/rng.hpp"

namespace repread {

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

GeneralizationMatrix cross_contrast_matrix(
    const std::vector<ReadingVector>& vectors,
    const std::map<std::string, std::vector<PairedVectors>>& test_sets) {
  if (vectors.empty()) throw Error(ErrorKind::kEmptyInput, "no reading vectors");
  GeneralizationMatrix m;
  for (const auto& v : vectors) {
    if (!test_sets.contains(v.contrast_name)) {
      throw Error(ErrorKind::kMissingInput, "no test set for contrast '" + v.contrast_name + "'");
    }
    m.contrast_names.push_back(v.contrast_name);
    m.column_labels.push_back(v.reference_pole.empty() ? v.contrast_name : v.reference_pole);
  }
  const auto n = static_cast<Eigen::Index>(vectors.size());
  m.accuracy.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& target = test_sets.at(m.contrast_names[static_cast<std::size_t>(j)]);
      m.accuracy(i, j) = classify_pairs(vectors[static_cast<std::size_t>(i)], target).accuracy;
    }
  }
  return m;
}

std::string to_csv(const GeneralizationMatrix& m) {
  std::ostringstream out;
  out << "train";
  for (const auto& c : m.column_labels) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.contrast_names.size(); ++i) {
    out << m.column_labels[i];
    for (std::size_t j = 0; j < m.contrast_names.size(); ++j) {
      out << ',' << fixed3(m.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  return out.str();
}

std::string to_text_table(const GeneralizationMatrix& m) {
  const std::string corner = "Train / Test";
  std::size_t first_width = corner.size();
  std::size_t cell_width = 6;  // "1.000*"
  for (const auto& l : m.column_labels) {
    first_width = std::max(first_width, l.size());
    cell_width = std::max(cell_width, l.size());
  }
  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    out << (left ? s + fill : fill + s);
  };
  pad(corner, first_width, true);
  for (const auto& l : m.column_labels) {
    out << "  ";
    pad(l, cell_width, false);
  }
  out << '\n';
  for (std::size_t i = 0; i < m.contrast_names.size(); ++i) {
    pad(m.column_labels[i], first_width, true);
    for (std::size_t j = 0; j < m.contrast_names.size(); ++j) {
      out << "  ";
      std::string cell = fixed3(m.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      cell += m.diagonal(i, j) ? "*" : " ";
      pad(cell, cell_width, false);
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const GeneralizationMatrix& m) {
  nlohmann::json j;
  j["contrast_names"] = m.contrast_names;
  j["column_labels"] = m.column_labels;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.accuracy.rows(); ++i) {
    std::vector<double> row(m.accuracy.row(i).begin(), m.accuracy.row(i).end());
    rows.push_back(row);
  }
  j["accuracy"] = std::move(rows);
  return j;
}

GeneralizationMatrix generalization_matrix_from_json(const nlohmann::json& j) {
  GeneralizationMatrix m;
  m.contrast_names = j.at("contrast_names").get<std::vector<std::string>>();
  m.column_labels = j.at("column_labels").get<std::vector<std::string>>();
  const auto rows = j.at("accuracy").get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Eigen::Index>(rows.size());
  m.accuracy.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < n; ++c) m.accuracy(i, c) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c));
  }
  return m;
}

namespace {

int side(double value, double threshold) { return (value > threshold) - (value < threshold); }

double mean_without(const std::vector<ScenarioScore>& scores, const std::vector<char>& removed) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (removed[i]) continue;
    sum += scores[i].score;
    ++count;
  }
  return sum / static_cast<double>(count);
}

void finish(AblationReport& r) {
  const auto& m = r.subset_means;
  r.n_subsets = static_cast<std::uint32_t>(m.size());
  if (m.empty()) {
    r.lo = r.hi = r.full_mean;
    return;
  }
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  r.lo = *lo;
  r.hi = *hi;
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
  double ss = 0.0;
  for (double x : m) ss += (x - mean) * (x - mean);
  r.std = m.size() > 1 && r.lo != r.hi ? std::sqrt(ss / static_cast<double>(m.size() - 1)) : 0.0;
  const int full_side = side(r.full_mean, r.threshold);
  r.flips = static_cast<std::uint32_t>(
      std::count_if(m.begin(), m.end(), [&](double x) { return side(x, r.threshold) != full_side; }));
}

AblationReport start_report(const std::vector<ScenarioScore>& scores, std::uint32_t k, double threshold) {
  if (k >= scores.size()) {
    throw Error(ErrorKind::kInvalidArgument, "k = " + std::to_string(k) + " must be smaller than " +
                                                 std::to_string(scores.size()) + " scenarios");
  }
  AblationReport r;
  r.k = k;
  r.threshold = threshold;
  r.full_mean = mean_without(scores, std::vector<char>(scores.size(), 0));
  return r;
}

}  // namespace

AblationReport leave_k_out(const std::vector<ScenarioScore>& scores, std::uint32_t k,
                           std::uint32_t n_subsets, std::uint64_t seed, double threshold) {
  AblationReport r = start_report(scores, k, threshold);
  r.seed = seed;
  const std::size_t n = scores.size();
  r.subset_means.reserve(n_subsets);
  std::vector<std::size_t> order(n);
  std::vector<char> removed(n);
  for (std::uint32_t s = 0; s < n_subsets; ++s) {
    Rng64 rng(seed + s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i + k >= n && i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    std::fill(removed.begin(), removed.end(), 0);
    for (std::size_t i = n - k; i < n; ++i) removed[order[i]] = 1;
    r.subset_means.push_back(mean_without(scores, removed));
  }
  finish(r);
  return r;
}

AblationReport leave_k_out_exhaustive(const std::vector<ScenarioScore>& scores, std::uint32_t k,
                                      double threshold) {
  AblationReport r = start_report(scores, k, threshold);
  const std::size_t n = scores.size();
  std::vector<std::size_t> combo(k);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  std::vector<char> removed(n);
  while (true) {
    std::fill(removed.begin(), removed.end(), 0);
    for (auto i : combo) removed[i] = 1;
    r.subset_means.push_back(mean_without(scores, removed));
    // next combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && combo[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) break;
    ++combo[pos - 1];
    for (std::size_t i = pos; i < k; ++i) combo[i] = combo[i - 1] + 1;
  }
  finish(r);
  return r;
}

std::string to_markdown(const std::vector<AblationReport>& reports) {
  std::ostringstream out;
  out << "| Vector | Mean | L" << (reports.empty() ? 5 : reports.front().k) << "O range | L"
      << (reports.empty() ? 5 : reports.front().k) << "O std | Flips |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    out << "| " << r.vector_name << " | " << fixed3(r.full_mean) << " | [" << fixed3(r.lo) << ", "
        << fixed3(r.hi) << "] | " << fixed3(r.std) << " | " << r.flips << '/' << r.n_subsets << " |\n";
  }
  return out.str();
}

std::string to_csv(const std::vector<AblationReport>& reports) {
  std::ostringstream out;
  out << "vector,mean,lo,hi,std,flips,n_subsets,k,seed\n";
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%u,%u,%u,%llu\n", r.full_mean, r.lo, r.hi,
                  r.std, r.flips, r.n_subsets, r.k, static_cast<unsigned long long>(r.seed));
    out << r.vector_name << buf;
  }
  return out.str();
}

nlohmann::json to_json(const AblationReport& r) {
  return {{"vector", r.vector_name}, {"full_mean", r.full_mean}, {"subset_means", r.subset_means},
          {"lo", r.lo},              {"hi", r.hi},               {"std", r.std},
          {"flips", r.flips},        {"k", r.k},                 {"n_subsets", r.n_subsets},
          {"seed", r.seed},          {"threshold", r.threshold}};
}

AblationReport ablation_report_from_json(const nlohmann::json& j) {
  AblationReport r;
  r.vector_name = j.at("vector").get<std::string>();
  r.full_mean = j.at("full_mean").get<double>();
  r.subset_means = j.at("subset_means").get<std::vector<double>>();
  r.lo = j.at("lo").get<double>();
  r.hi = j.at("hi").get<double>();
  r.std = j.at("std").get<double>();
  r.flips = j.at("flips").get<std::uint32_t>();
  r.k = j.at("k").get<std::uint32_t>();
  r.n_subsets = j.at("n_subsets").get<std::uint32_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.threshold = j.at("threshold").get<double>();
  return r;
}

TokenRobustnessTable token_robustness(const std::vector<std::pair<std::string, ScoreSummary>>& results) {
  if (results.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "token robustness needs at least two results");
  }
  TokenRobustnessTable t;
  for (const auto& [label, s] : results) t.rows.push_back({label, s.mean, s.se});
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < t.rows.size(); ++j) {
      const double d = std::abs(t.rows[i].mean - t.rows[j].mean);
      t.deviations.push_back({t.rows[i].label, t.rows[j].label, d});
      t.max_deviation = std::max(t.max_deviation, d);
    }
  }
  return t;
}

std::string to_markdown(const TokenRobustnessTable& t) {
  std::ostringstream out;
  out << "| Tokens | Score (± SE) |\n|---|---|\n";
  for (const auto& r : t.rows) out << "| " << r.label << " | " << fixed3(r.mean) << " ± " << fixed3(r.se) << " |\n";
  out << "\n| A | B | abs. deviation |\n|---|---|---|\n";
  for (const auto& d : t.deviations) out << "| " << d.a << " | " << d.b << " | " << fixed3(d.abs_diff) << " |\n";
  out << "\nMax deviation: " << fixed3(t.max_deviation) << '\n';
  return out.str();
}

std::string to_csv(const TokenRobustnessTable& t) {
  std::ostringstream out;
  out << "a,b,mean_a,mean_b,abs_diff\n";
  char buf[96];
  for (const auto& d : t.deviations) {
    double ma = 0.0;
    double mb = 0.0;
    for (const auto& r : t.rows) {
      if (r.label == d.a) ma = r.mean;
      if (r.label == d.b) mb = r.mean;
    }
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", ma, mb, d.abs_diff);
    out << d.a << ',' << d.b << buf;
  }
  return out.str();
}

nlohmann::json to_json(const TokenRobustnessTable& t) {
  auto rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back({{"label", r.label}, {"mean", r.mean}, {"se", r.se}});
  auto devs = nlohmann::json::array();
  for (const auto& d : t.deviations) devs.push_back({{"a", d.a}, {"b", d.b}, {"abs_diff", d.abs_diff}});
  return {{"rows", rows}, {"deviations", devs}, {"max_deviation", t.max_deviation}};
}

TokenRobustnessTable token_robustness_from_json(const nlohmann::json& j) {
  TokenRobustnessTable t;
  for (const auto& r : j.at("rows")) {
    t.rows.push_back({r.at("label").get<std::string>(), r.at("mean").get<double>(), r.at("se").get<double>()});
  }
  for (const auto& d : j.at("deviations")) {
    t.deviations.push_back({d.at("a").get<std::string>(), d.at("b").get<std::string>(), d.at("abs_diff").get<double>()});
  }
  t.max_deviation = j.at("max_deviation").get<double>();
  return t;
}

}  // namespace repread
