#include "repread/reading_vector.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "repread/error.hpp"

namespace repread {

Vec principal_direction(const Eigen::MatrixXd& rows, const Vec& start,
                        const ExtractionOptions& options, ExtractionDiagnostics* diagnostics) {
  const Eigen::Index dim = rows.cols();
  const double n = static_cast<double>(rows.rows());
  const double scale = rows.norm();
  auto apply = [&](const Vec& v) -> Vec { return rows.transpose() * (rows * v) / n; };

  // Start from the caller's guess unless it lies in the null space of the
  // data; fall back to basis vectors in order.
  Vec v = start;
  Vec w = apply(v);
  for (Eigen::Index i = 0; w.norm() <= 1e-14 * scale * scale / n; ++i) {
    if (i == dim) throw Error(ErrorKind::kDegenerateData, "differences have zero covariance");
    v = Vec::Unit(dim, i);
    w = apply(v);
  }

  ExtractionDiagnostics diag;
  for (diag.iterations = 1; diag.iterations <= options.max_iterations; ++diag.iterations) {
    const double norm = w.norm();
    Vec next = w / norm;
    const double cosine = next.dot(v);
    v = std::move(next);
    diag.eigenvalue = norm;
    if (cosine >= 1.0 - options.cosine_tolerance) {
      diag.converged = true;
      break;
    }
    w = apply(v);
  }
  diag.iterations = std::min(diag.iterations, options.max_iterations);
  if (diagnostics != nullptr) *diagnostics = diag;
  return v;
}

ReadingVector extract_reading_vector(const std::vector<PairedVectors>& train_pairs,
                                     const ExtractionOptions& options,
                                     ExtractionDiagnostics* diagnostics) {
  if (train_pairs.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "need at least 2 train pairs, got " +
                                                 std::to_string(train_pairs.size()));
  }
  const Eigen::Index dim = train_pairs.front().experimental.size();
  if (dim == 0) throw Error(ErrorKind::kDimensionMismatch, "empty activation vectors");
  const auto n = static_cast<Eigen::Index>(train_pairs.size());

  Eigen::MatrixXd diffs(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = train_pairs[static_cast<std::size_t>(i)];
    if (p.experimental.size() != dim || p.reference.size() != dim) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "pair " + std::to_string(p.pair_id) + " has a different dimension");
    }
    diffs.row(i) = (p.experimental - p.reference).transpose();
  }
  const Vec mean_diff = diffs.colwise().mean().transpose();
  const double raw_scale = diffs.norm();

  if (options.centering == DifferenceCentering::kMean) diffs.rowwise() -= mean_diff.transpose();
  if (diffs.norm() <= 1e-12 * raw_scale || raw_scale == 0.0) {
    throw Error(ErrorKind::kDegenerateData, "differences have zero covariance");
  }

  const double mean_norm = mean_diff.norm();
  const Vec start = mean_norm > 0.0 ? Vec(mean_diff / mean_norm) : Vec(Vec::Unit(dim, 0));
  Vec direction = principal_direction(diffs, start, options, diagnostics);
  if (mean_diff.dot(direction) < 0.0) direction = -direction;

  ReadingVector rv;
  rv.direction = std::move(direction);
  rv.train_size = static_cast<std::uint32_t>(n);
  for (const auto& p : train_pairs) {
    rv.mu_exp += p.experimental.dot(rv.direction);
    rv.mu_ref += p.reference.dot(rv.direction);
  }
  rv.mu_exp /= static_cast<double>(n);
  rv.mu_ref /= static_cast<double>(n);
  if (!(rv.mu_exp > rv.mu_ref)) {
    throw Error(ErrorKind::kDegenerateData, "direction does not separate the poles");
  }
  return rv;
}

ClassificationResult classify_pairs(const ReadingVector& v, const std::vector<PairedVectors>& test_pairs,
                                    double confidence) {
  if (test_pairs.empty()) throw Error(ErrorKind::kEmptyInput, "empty test set");
  ClassificationResult r;
  r.n_total = static_cast<std::uint32_t>(test_pairs.size());
  for (const auto& p : test_pairs) {
    if (p.experimental.size() != v.direction.size() || p.reference.size() != v.direction.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "test pair " + std::to_string(p.pair_id) +
                                                     " does not match the vector dimension");
    }
    if (p.experimental.dot(v.direction) > p.reference.dot(v.direction)) ++r.n_correct;
  }
  r.accuracy = static_cast<double>(r.n_correct) / r.n_total;
  r.confidence = confidence;
  std::tie(r.ci_low, r.ci_high) = clopper_pearson(r.n_correct, r.n_total, confidence);
  return r;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::kInvalidArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_beta_inverse(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "probability outside [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // I_x is monotone in x; bisect until the bracket stops shrinking.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (incomplete_beta(a, b, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> clopper_pearson(std::uint32_t k, std::uint32_t n, double confidence) {
  if (k > n) throw Error(ErrorKind::kInvalidArgument, "k exceeds n");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "confidence must lie in (0, 1)");
  }
  const double alpha = 1.0 - confidence;
  const double kd = k;
  const double nd = n;
  const double low = k == 0 ? 0.0 : incomplete_beta_inverse(kd, nd - kd + 1.0, alpha / 2.0);
  const double high = k == n ? 1.0 : incomplete_beta_inverse(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return {low, high};
}

namespace {

double round_significant(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

}  // namespace

nlohmann::json to_json(const ReadingVector& v) {
  nlohmann::json j;
  j["contrast_name"] = v.contrast_name;
  j["experimental_pole"] = v.experimental_pole;
  j["reference_pole"] = v.reference_pole;
  j["layer"] = v.layer;
  j["mu_exp"] = v.mu_exp;
  j["mu_ref"] = v.mu_ref;
  j["train_size"] = v.train_size;
  auto dir = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.direction.size(); ++i) dir.push_back(round_significant(v.direction[i], 9));
  j["direction"] = std::move(dir);
  return j;
}

ReadingVector reading_vector_from_json(const nlohmann::json& j) {
  ReadingVector v;
  try {
    v.contrast_name = j.at("contrast_name").get<std::string>();
    v.experimental_pole = j.value("experimental_pole", "");
    v.reference_pole = j.value("reference_pole", "");
    v.layer = j.at("layer").get<int>();
    v.mu_exp = j.at("mu_exp").get<double>();
    v.mu_ref = j.at("mu_ref").get<double>();
    v.train_size = j.at("train_size").get<std::uint32_t>();
    const auto dir = j.at("direction").get<std::vector<double>>();
    v.direction = Eigen::Map<const Vec>(dir.data(), static_cast<Eigen::Index>(dir.size()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad reading vector: ") + e.what());
  }
  const double norm = v.direction.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::kDegenerateData, "reading vector has zero norm");
  v.direction /= norm;
  return v;
}

nlohmann::json to_json(const ClassificationResult& c) {
  return {{"n_correct", c.n_correct}, {"n_total", c.n_total}, {"accuracy", c.accuracy},
          {"ci_low", c.ci_low},       {"ci_high", c.ci_high}, {"confidence", c.confidence}};
}

}  // namespace repread
