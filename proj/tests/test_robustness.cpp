#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "repread/error.hpp"
#include "repread/rng.hpp"
#include "repread/robustness.hpp"

using namespace repread;

namespace {

std::vector<ScenarioScore> scores_of(const std::vector<double>& xs) {
  std::vector<ScenarioScore> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({static_cast<std::uint32_t>(i + 1), xs[i]});
  return out;
}

// Brute force over bitmasks with exactly k bits set, ascending mask order.
struct BruteForce {
  std::vector<double> means;
  double lo, hi, std;
  std::uint32_t flips;
};

BruteForce brute_force(const std::vector<double>& xs, unsigned k, double threshold) {
  BruteForce b{};
  const unsigned n = static_cast<unsigned>(xs.size());
  const double full = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) != k) continue;
    double s = 0;
    for (unsigned i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) s += xs[i];
    }
    b.means.push_back(s / (n - k));
  }
  b.lo = *std::min_element(b.means.begin(), b.means.end());
  b.hi = *std::max_element(b.means.begin(), b.means.end());
  const double m = std::accumulate(b.means.begin(), b.means.end(), 0.0) / b.means.size();
  double ss = 0;
  for (double x : b.means) ss += (x - m) * (x - m);
  b.std = std::sqrt(ss / (b.means.size() - 1));
  b.flips = 0;
  for (double x : b.means) {
    if ((x > threshold) != (full > threshold)) ++b.flips;
  }
  return b;
}

ReadingVector vec_along(const Vec& dir, const std::string& name, const std::string& ref) {
  ReadingVector v;
  v.direction = dir.normalized();
  v.contrast_name = name;
  v.experimental_pole = "civic";
  v.reference_pole = ref;
  v.mu_exp = 1.0;
  v.mu_ref = -1.0;
  return v;
}

std::vector<PairedVectors> pairs_along(const Vec& dir, std::uint64_t seed, int n) {
  Rng64 rng(seed);
  std::vector<PairedVectors> out;
  for (int i = 0; i < n; ++i) {
    Vec base(dir.size());
    for (Eigen::Index j = 0; j < base.size(); ++j) base[j] = rng.gaussian();
    out.push_back({static_cast<std::uint32_t>(i), base + dir, base - dir});
  }
  return out;
}

}  // namespace

TEST_SUITE("robustness") {
  TEST_CASE("exhaustive leave-2-out matches brute force") {
    const std::vector<double> xs = {0.41, 0.62, 0.47, 0.55, 0.38, 0.71, 0.52};
    const auto r = leave_k_out_exhaustive(scores_of(xs), 2);
    const auto b = brute_force(xs, 2, 0.5);
    REQUIRE(r.n_subsets == 21);
    auto sorted = r.subset_means;
    auto expected = b.means;
    std::sort(sorted.begin(), sorted.end());
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < 21; ++i) CHECK(sorted[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(r.lo == doctest::Approx(b.lo).epsilon(1e-15));
    CHECK(r.hi == doctest::Approx(b.hi).epsilon(1e-15));
    CHECK(r.std == doctest::Approx(b.std).epsilon(1e-12));
    CHECK(r.flips == b.flips);
  }

  TEST_CASE("k of zero and constant scores") {
    const auto xs = scores_of({0.3, 0.9, 0.4, 0.6});
    const auto r = leave_k_out(xs, 0, 50, 9);
    CHECK(r.n_subsets == 50);
    CHECK(r.std == 0.0);
    CHECK(r.flips == 0);
    for (double m : r.subset_means) CHECK(m == r.full_mean);

    const auto flat = leave_k_out(scores_of(std::vector<double>(35, 0.7)), 5, 200, 42);
    CHECK(flat.lo == doctest::Approx(0.7));
    CHECK(flat.hi == doctest::Approx(0.7));
    CHECK(flat.std == doctest::Approx(0.0));
    CHECK(flat.flips == 0);
    CHECK_THROWS_AS(leave_k_out(xs, 4, 10, 1), Error);
  }

  TEST_CASE("subset choice depends on the seed, not the scores") {
    Rng64 rng(5);
    std::vector<double> a(35), b(35);
    for (auto& x : a) x = rng.uniform();
    // Score 2^i makes the removed set readable from each subset mean.
    for (std::size_t i = 0; i < 35; ++i) b[i] = std::ldexp(1.0, static_cast<int>(i));
    const double total = std::ldexp(1.0, 35) - 1.0;
    const auto ra = leave_k_out(scores_of(a), 5, 30, 77);
    const auto rb = leave_k_out(scores_of(b), 5, 30, 77);
    CHECK(ra.subset_means == leave_k_out(scores_of(a), 5, 30, 77).subset_means);
    for (std::size_t s = 0; s < 30; ++s) {
      const auto removed = static_cast<std::uint64_t>(std::llround(total - rb.subset_means[s] * 30));
      CHECK(std::popcount(removed) == 5);
      double kept = 0.0;
      for (std::size_t i = 0; i < 35; ++i) {
        if (!(removed >> i & 1u)) kept += a[i];
      }
      CHECK(ra.subset_means[s] == doctest::Approx(kept / 30).epsilon(1e-12));
    }
    CHECK(ra.lo <= ra.hi);
    CHECK(ra.flips <= ra.n_subsets);
  }

  TEST_CASE("flip counting crosses the threshold") {
    const auto r = leave_k_out_exhaustive(scores_of({0.52, 0.51, 0.10, 0.90}), 1);
    // full mean 0.5075; removing 0.90 drops to 0.377
    CHECK(r.flips == 1);
  }

  TEST_CASE("token deviation examples") {
    ScoreSummary a;
    a.mean = 0.082;
    a.se = 0.006;
    ScoreSummary b;
    b.mean = 0.078;
    b.se = 0.008;
    const auto t = token_robustness({{"communal/individual", a}, {"embedded/individual", b}});
    CHECK(t.max_deviation == doctest::Approx(0.004));
    REQUIRE(t.deviations.size() == 1);

    ScoreSummary p1, p2, p3;
    p1.mean = 0.562;
    p2.mean = 0.633;
    p3.mean = 0.663;
    const auto t3 = token_robustness({{"collaborative/administrative", p1}, {"consequential/efficient", p2}, {"consequential/utilitarian", p3}});
    CHECK(t3.deviations.size() == 3);
    CHECK(t3.max_deviation == doctest::Approx(0.101));
    CHECK(token_robustness({{"x", a}, {"x", a}}).max_deviation == 0.0);
    CHECK_THROWS_AS(token_robustness({{"x", a}}), Error);

    const auto back = token_robustness_from_json(to_json(t3));
    CHECK(to_csv(back) == to_csv(t3));
  }

  TEST_CASE("shared direction generalizes everywhere") {
    Vec u = Vec::LinSpaced(16, -1.0, 2.0);
    u.normalize();
    const std::vector<std::string> refs = {"independent", "professional", "analytical", "compliant",
                                           "practical", "transactional", "procedural", "detached"};
    std::vector<ReadingVector> vs;
    std::map<std::string, std::vector<PairedVectors>> tests;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      vs.push_back(vec_along(u, "civic/" + refs[i], refs[i]));
      tests["civic/" + refs[i]] = pairs_along(u, i, 20);
    }
    const auto m = cross_contrast_matrix(vs, tests);
    CHECK(m.accuracy.rows() == 8);
    CHECK(m.accuracy.minCoeff() == 1.0);
    CHECK(m.diagonal(3, 3));
    CHECK_FALSE(m.diagonal(3, 4));
    CHECK(m.column_labels[0] == "independent");
    const auto text = to_text_table(m);
    CHECK(text.find("1.000*") != std::string::npos);
  }

  TEST_CASE("matrix permutes with its contrasts") {
    std::vector<ReadingVector> vs;
    std::map<std::string, std::vector<PairedVectors>> tests;
    for (int i = 0; i < 4; ++i) {
      Vec d = Vec::Unit(6, i) + 0.4 * Vec::Unit(6, (i + 1) % 6);
      vs.push_back(vec_along(d, "c" + std::to_string(i), "r" + std::to_string(i)));
      tests["c" + std::to_string(i)] = pairs_along(0.3 * Vec::Unit(6, i), 100 + i, 25);
    }
    const auto m = cross_contrast_matrix(vs, tests);
    std::vector<ReadingVector> perm = {vs[2], vs[0], vs[3], vs[1]};
    const auto pm = cross_contrast_matrix(perm, tests);
    const int idx[] = {2, 0, 3, 1};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) CHECK(pm.accuracy(r, c) == m.accuracy(idx[r], idx[c]));
    }
    for (int r = 0; r < 4; ++r) CHECK(m.accuracy(r, r) >= m.accuracy.row(r).minCoeff());
  }

  TEST_CASE("single contrast and missing test sets") {
    Vec u = Vec::Unit(3, 1);
    const auto m = cross_contrast_matrix({vec_along(u, "a", "b")}, {{"a", pairs_along(u, 1, 5)}});
    CHECK(m.accuracy.rows() == 1);
    CHECK(m.accuracy(0, 0) == 1.0);
    try {
      cross_contrast_matrix({vec_along(u, "a", "b")}, {});
      FAIL("missing test set accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMissingInput);
    }
    const auto back = generalization_matrix_from_json(to_json(m));
    CHECK(to_csv(back) == to_csv(m));
  }

  TEST_CASE("ablation table columns") {
    auto r = leave_k_out(scores_of(std::vector<double>(35, 0.082)), 5, 200, 42);
    r.vector_name = "role (communal/individual)";
    const auto md = to_markdown({r});
    CHECK(md.find("| Vector | Mean | L5O range | L5O std | Flips |") != std::string::npos);
    CHECK(md.find("| role (communal/individual) | 0.082 | [0.082, 0.082] | 0.000 | 0/200 |") != std::string::npos);
    const auto back = ablation_report_from_json(to_json(r));
    CHECK(back.subset_means == r.subset_means);
    CHECK(to_csv({back}) == to_csv({r}));
  }
}
