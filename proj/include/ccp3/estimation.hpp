#pragma once

// Empirical moments of complex samples and the concentration radii that make
// the data-driven reformulation hold with probability at least 1 - delta.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccp3/ambiguity_reform.hpp"
#include "ccp3/complex_core.hpp"

namespace ccp3 {

struct SampleSet {
  std::vector<ComplexVec> samples;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] Eigen::Index dim() const { return samples.empty() ? 0 : samples.front().size(); }
  /// Throws std::invalid_argument when empty or ragged.
  void validate() const;
};

/// Mean, covariance and pseudo-covariance with 1/N normalization.
MomentTriple empirical_moments(const SampleSet& s);

/// Streaming moments over column batches, accumulated around the first
/// sample to limit cancellation. Same estimator as empirical_moments.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index dim);
  void add(const ComplexMat& columns);
  [[nodiscard]] MomentTriple moments() const;
  [[nodiscard]] double max_norm() const { return max_norm_; }
  [[nodiscard]] long long count() const { return count_; }

 private:
  Eigen::Index dim_;
  long long count_ = 0;
  double max_norm_ = 0.0;
  ComplexVec shift_;
  ComplexVec s1_;
  ComplexMat s2_;
  ComplexMat s2t_;
};

struct ConcentrationRadii {
  double r1 = 0.0;
  double r2 = 0.0;
  long long min_n = 0;
  bool below_min_n = false;
};

/// r1 = R/sqrt(N) (2 + sqrt(2 ln(6/delta))), r2 = 2 R^2/sqrt(N) (...),
/// min_n = ceil((2 + sqrt(2 ln(6/delta)))^2).
ConcentrationRadii concentration_radii(double R, long long N, double delta);

/// Largest sample norm: a lower estimate of the true support radius.
double support_radius(const SampleSet& s);

struct EstimatedMoments {
  MomentTriple triple;
  double R = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double delta = 0.0;
  long long N = 0;
  bool below_min_n = false;
  bool support_estimated = false;  // R taken from the sample maximum
  std::vector<std::string> warnings;
};

/// Empirical moments plus radii. Without R the sample maximum is used and a
/// warning is recorded, since the guarantee then only holds heuristically.
EstimatedMoments estimate_with_radii(const SampleSet& s, double delta, std::optional<double> R = {});

/// Radii for moments that were accumulated elsewhere.
EstimatedMoments attach_radii(MomentTriple triple, double sample_max_norm, long long N, double delta,
                              std::optional<double> R = {});

DataDrivenRow to_data_driven_row(const EstimatedMoments& est);

/// One record per line: 2(n+1) decimal numbers, interleaved re/im. Blank
/// lines and lines starting with '#' are skipped.
SampleSet read_samples(std::istream& in);
SampleSet load_samples(const std::string& path);
void write_samples(std::ostream& out, const SampleSet& s);

}  // namespace ccp3
