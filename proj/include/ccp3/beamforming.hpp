#pragma once

// Narrowband MVDR beamforming on a uniform linear array, with chance-constrained
// robustness against steering-vector mismatch a~ = a + delta.

#include <cstdint>
#include <string>
#include <vector>

#include "ccp3/complex_core.hpp"
#include "ccp3/socp_solver.hpp"

namespace ccp3 {

struct ArrayModel {
  Eigen::Index M = 8;
  double spacing = 0.5;  // wavelengths
  double signal_doa = 3.0;  // degrees
  std::vector<double> interferer_doas{15.0, 30.0};
  std::vector<double> interferer_inr_db{15.0, 15.0};
  double noise_power = 1.0;

  void validate() const;
};

struct BeamformerResult {
  ComplexVec w;
  double objective = 0.0;  // w^H R w
  double sinr_db = 0.0;    // unit signal power, presumed steering vector
  double distortionless_residual = 0.0;  // |Re(a^H w) - 1|
  std::string status = "optimal";
};

/// exp(i 2 pi spacing k sin(angle)), k = 0..M-1.
ComplexVec ula_steering(const ArrayModel& model, double angle_deg);

/// sum_k INR_k sigma_n^2 a_k a_k^H + sigma_n^2 I.
ComplexMat interference_noise_cov(const ArrayModel& model);

/// sigma_s^2 |w^H a|^2 / (w^H R w).
double output_sinr(const ComplexVec& w, const ComplexVec& a, const ComplexMat& R, double signal_power);

/// w = R^-1 a / (a^H R^-1 a). Throws std::invalid_argument when R is not PD.
BeamformerResult mvdr_closed_form(const ComplexMat& R, const ComplexVec& a);

enum class MvdrMode { Gaussian, MomentExact, DataDriven };
std::string to_string(MvdrMode mode);

/// How the deviation ||Gamma^1/2 w|| enters the distortionless constraint.
/// Exact uses the standard deviation of Re(delta^H w), which is
/// ||Gamma^1/2 w|| / sqrt(2) for proper delta. Halved uses ||Gamma^1/2 w|| / 2.
enum class MismatchScale { Exact, Halved };

struct RobustMvdrOptions {
  double r1 = 0.0;  // DataDriven only
  double r2 = 0.0;  // DataDriven only
  MismatchScale scale = MismatchScale::Exact;
  double tol = 1e-9;
  std::string backend = "reference";
};

/// min w^H R w  s.t.  k sigma(w) + r1 ||w|| + Re(mu^H w) <= Re(a^H w) - 1,
///                    Re(a^H w) >= 0,  Im(a^H w) = 0,
/// with sigma(w) the deviation of Re(delta^H w) under the mismatch moments
/// (inflated by r2 I in DataDriven mode). k is the Gaussian quantile in
/// Gaussian mode and the one-sided Chebyshev factor otherwise. Infeasibility
/// is reported through status, not thrown.
BeamformerResult robust_mvdr(const ComplexMat& R, const ComplexVec& a, const MomentTriple& mismatch, double p,
                             MvdrMode mode, const RobustMvdrOptions& opts = {});

double mvdr_safety_factor(MvdrMode mode, double p);

struct SweepConfig {
  ArrayModel model;
  double p = 0.7;
  double mismatch_power = 1.0;  // sigma_delta^2, Gamma_delta = sigma_delta^2 / M I
  std::vector<double> snr_db{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
  int trials = 100;
  std::vector<long long> estimation_samples{1000, 10000, 100000};
  double delta = 0.05;
  bool include_snapshot = true;  // also design with R estimated from snapshots
  Eigen::Index snapshots = 100;
  std::uint64_t seed = 3;
  MismatchScale scale = MismatchScale::Exact;
  double tol = 1e-9;
  std::string backend = "reference";
};

/// One point of a curve. mode is one of "optimal", "mvdr_mismatched",
/// "true_gaussian", "known_moments", "estimated_moments"; samples is the
/// estimation sample count (0 for the other modes).
struct SweepRow {
  std::string mode;
  long long samples = 0;
  std::string covariance;  // "analytic" or "snapshot"
  double snr_db = 0.0;
  double sinr_db = 0.0;  // 10 log10 of the trial-averaged SINR
  int trials = 0;
  int failures = 0;
};

/// Curves are produced for the analytic design covariance and, when enabled,
/// for the sample covariance of `snapshots` interference-plus-noise snapshots.
/// Each trial draws its own mismatch (and snapshots and estimation samples)
/// from a stream indexed by the trial number, so the result does not depend
/// on evaluation order. SINR is evaluated with the actual steering a + delta
/// and the analytic interference-plus-noise covariance.
std::vector<SweepRow> snr_sweep(const SweepConfig& cfg);

}  // namespace ccp3
