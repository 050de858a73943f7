#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repread/actdump.hpp"
#include "repread/core.hpp"

namespace repread {

/// Unit direction in one layer's activation space, oriented so the
/// experimental pole projects higher, with the train-set pole anchors.
struct ReadingVector {
  Vec direction;
  int layer = -1;
  std::string contrast_name;
  std::string experimental_pole;
  std::string reference_pole;
  double mu_exp = 0.0;
  double mu_ref = 0.0;
  std::uint32_t train_size = 0;
};

/// How paired differences are treated before the principal component is taken.
enum class DifferenceCentering {
  /// Second-moment PCA of the differences, i.e. PCA of the sign-symmetric
  /// set {+d_i, -d_i}. Insensitive to the orientation of each pair.
  kNone,
  /// Subtract the mean difference first. A shift common to all pairs is
  /// removed along with it, so a concept carried by a constant offset is lost.
  kMean,
};

struct ExtractionOptions {
  DifferenceCentering centering = DifferenceCentering::kNone;
  int max_iterations = 10000;
  double cosine_tolerance = 1e-12;
};

struct ExtractionDiagnostics {
  int iterations = 0;
  bool converged = false;
  double eigenvalue = 0.0;
};

ReadingVector extract_reading_vector(const std::vector<PairedVectors>& train_pairs,
                                     const ExtractionOptions& options = {},
                                     ExtractionDiagnostics* diagnostics = nullptr);

/// Leading eigenvector of the symmetric operator x -> D^T (D x) by power
/// iteration, with D the n x d matrix of (optionally centered) differences.
/// Exposed for the tests; extract_reading_vector calls it.
Vec principal_direction(const Eigen::MatrixXd& rows, const Vec& start,
                        const ExtractionOptions& options, ExtractionDiagnostics* diagnostics);

struct ClassificationResult {
  std::uint32_t n_correct = 0;
  std::uint32_t n_total = 0;
  double accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double confidence = 0.95;
};

/// A pair is correct iff its experimental half projects strictly higher.
ClassificationResult classify_pairs(const ReadingVector& v, const std::vector<PairedVectors>& test_pairs,
                                    double confidence = 0.95);

/// Exact binomial interval for k successes out of n.
std::pair<double, double> clopper_pearson(std::uint32_t k, std::uint32_t n, double confidence);

/// Regularized incomplete beta I_x(a, b) and its inverse in x.
double incomplete_beta(double a, double b, double x);
double incomplete_beta_inverse(double a, double b, double p);

/// Direction is written as decimals with 9 significant digits.
nlohmann::json to_json(const ReadingVector& v);
ReadingVector reading_vector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassificationResult& c);

}  // namespace repread
