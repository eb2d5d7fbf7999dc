#include "ccp3/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "ccp3/ambiguity_reform.hpp"
#include "ccp3/ces_distributions.hpp"
#include "ccp3/estimation.hpp"

namespace ccp3 {

using Index = Eigen::Index;

void ArrayModel::validate() const {
  if (M < 2) throw std::invalid_argument("array needs at least 2 sensors");
  if (!(spacing > 0.0)) throw std::invalid_argument("sensor spacing must be positive");
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise power must be positive");
  if (interferer_doas.size() != interferer_inr_db.size())
    throw std::invalid_argument("interferer_doas and interferer_inr_db differ in length");
}

ComplexVec ula_steering(const ArrayModel& model, double angle_deg) {
  model.validate();
  const double phase = 2.0 * std::numbers::pi * model.spacing * std::sin(angle_deg * std::numbers::pi / 180.0);
  ComplexVec a(model.M);
  for (Index k = 0; k < model.M; ++k) a(k) = std::polar(1.0, phase * static_cast<double>(k));
  return a;
}

ComplexMat interference_noise_cov(const ArrayModel& model) {
  model.validate();
  ComplexMat R = model.noise_power * ComplexMat::Identity(model.M, model.M);
  for (std::size_t j = 0; j < model.interferer_doas.size(); ++j) {
    const ComplexVec a = ula_steering(model, model.interferer_doas[j]);
    const double power = std::pow(10.0, model.interferer_inr_db[j] / 10.0) * model.noise_power;
    R += power * a * a.adjoint();
  }
  return R;
}

double output_sinr(const ComplexVec& w, const ComplexVec& a, const ComplexMat& R, double signal_power) {
  const double num = std::norm(w.dot(a));
  const double den = w.dot(R * w).real();
  return signal_power * num / den;
}

BeamformerResult mvdr_closed_form(const ComplexMat& R, const ComplexVec& a) {
  if (R.rows() != R.cols() || R.rows() != a.size()) throw std::invalid_argument("mvdr: dimension mismatch");
  Eigen::LLT<ComplexMat> llt(R);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("mvdr: covariance is not positive definite");
  const ComplexVec x = llt.solve(a);
  BeamformerResult out;
  out.w = x / a.dot(x);
  out.objective = out.w.dot(R * out.w).real();
  out.sinr_db = 10.0 * std::log10(output_sinr(out.w, a, R, 1.0));
  out.distortionless_residual = std::abs(a.dot(out.w).real() - 1.0);
  return out;
}

std::string to_string(MvdrMode mode) {
  switch (mode) {
    case MvdrMode::Gaussian: return "gaussian";
    case MvdrMode::MomentExact: return "moment_exact";
    case MvdrMode::DataDriven: return "data_driven";
  }
  return "unknown";
}

double mvdr_safety_factor(MvdrMode mode, double p) {
  if (mode == MvdrMode::Gaussian) return safety_factor(CesKnown{Gaussian{}}, p);
  return safety_factor(MomentExact{}, p);
}

BeamformerResult robust_mvdr(const ComplexMat& R, const ComplexVec& a, const MomentTriple& mismatch, double p,
                             MvdrMode mode, const RobustMvdrOptions& opts) {
  const Index M = a.size();
  if (R.rows() != M || R.cols() != M || mismatch.dim() != M)
    throw std::invalid_argument("robust_mvdr: dimension mismatch");
  require_valid(mismatch, "mismatch moments");
  if (opts.r1 < 0.0 || opts.r2 < 0.0) throw std::invalid_argument("robust_mvdr: radii must be nonnegative");
  const double k = mvdr_safety_factor(mode, p);

  ComplexMat cov = mismatch.cov;
  ComplexMat pcov = mismatch.pcov;
  double r1 = 0.0;
  if (mode == MvdrMode::DataDriven) {
    r1 = opts.r1;
    if (opts.r2 > 0.0) {
      cov += opts.r2 * ComplexMat::Identity(M, M);
      pcov += opts.r2 * ComplexMat::Identity(M, M);
    }
  }
  const double scale = opts.scale == MismatchScale::Exact ? 1.0 : 1.0 / std::numbers::sqrt2;
  const RealMat F = (k * scale) * psd_factor(augmented_covariance(cov, pcov));
  const RealMat Rf = psd_factor(real_representation(R));

  // x = [Re w; Im w; t; u]
  const Index nw = 2 * M;
  const Index t_col = nw;
  const Index u_col = nw + 1;
  SocpProblem prob(nw + 2);
  prob.objective = RealVec::Zero(nw + 2);
  prob.objective(t_col) = 1.0;

  RealMat A = RealMat::Zero(Rf.rows(), nw + 2);
  A.leftCols(nw) = Rf;
  RealVec c = RealVec::Zero(nw + 2);
  c(t_col) = 1.0;
  prob.cone_blocks.push_back(ConeBlock::from_dense(A, RealVec::Zero(Rf.rows()), c, 0.0));

  const RealVec sa = stack(a);
  const RealVec smu = stack(mismatch.mean);
  A = RealMat::Zero(F.rows(), nw + 2);
  A.leftCols(nw) = F;
  c = RealVec::Zero(nw + 2);
  c.head(nw) = sa - smu;
  c(u_col) = -1.0;
  prob.cone_blocks.push_back(ConeBlock::from_dense(A, RealVec::Zero(F.rows()), c, -1.0));

  A = RealMat::Zero(nw, nw + 2);
  A.leftCols(nw) = r1 * RealMat::Identity(nw, nw);
  c = RealVec::Zero(nw + 2);
  c(u_col) = 1.0;
  prob.cone_blocks.push_back(ConeBlock::from_dense(A, RealVec::Zero(nw), c, 0.0));

  c = RealVec::Zero(nw + 2);
  c.head(nw) = sa;
  prob.cone_blocks.push_back(ConeBlock::linear(c, 0.0));

  // Im(a^H w) = Re(a) . Im(w) - Im(a) . Re(w)
  std::vector<Eigen::Triplet<double>> im_row;
  for (Index j = 0; j < M; ++j) {
    im_row.emplace_back(0, j, -a(j).imag());
    im_row.emplace_back(0, M + j, a(j).real());
  }
  prob.add_equality(im_row, 0.0);

  SolverOptions so;
  so.tol = opts.tol;
  so.backend = opts.backend;
  const SocpSolution sol = solve(prob, so);
  BeamformerResult out;
  out.status = to_string(sol.status);
  if (sol.status != SolveStatus::Optimal) {
    out.w = ComplexVec::Zero(M);
    return out;
  }
  out.w = unstack(sol.x.head(nw));
  out.objective = out.w.dot(R * out.w).real();
  out.sinr_db = 10.0 * std::log10(output_sinr(out.w, a, R, 1.0));
  out.distortionless_residual = std::abs(a.dot(out.w).real() - 1.0);
  return out;
}

namespace {

struct CurveKey {
  std::string mode;
  long long samples;
  std::string covariance;
  bool operator<(const CurveKey& o) const {
    return std::tie(covariance, mode, samples) < std::tie(o.covariance, o.mode, o.samples);
  }
};

struct Accum {
  std::vector<double> sum;
  int ok = 0;
  int failures = 0;
};

}  // namespace

std::vector<SweepRow> snr_sweep(const SweepConfig& cfg) {
  cfg.model.validate();
  if (cfg.trials < 1) throw std::invalid_argument("sweep needs at least one trial");
  if (cfg.snr_db.empty()) throw std::invalid_argument("sweep needs at least one SNR value");
  if (!(cfg.mismatch_power >= 0.0)) throw std::invalid_argument("mismatch power must be nonnegative");
  if (cfg.include_snapshot && cfg.snapshots < 1) throw std::invalid_argument("snapshot count must be positive");
  const Index M = cfg.model.M;
  const ComplexMat R = interference_noise_cov(cfg.model);
  const ComplexVec a = ula_steering(cfg.model, cfg.model.signal_doa);
  const MomentTriple mismatch =
      MomentTriple::proper(ComplexVec::Zero(M), (cfg.mismatch_power / static_cast<double>(M)) *
                                                    ComplexMat::Identity(M, M));
  const CesSampler delta_sampler(Gaussian{}, mismatch);
  const CesSampler snapshot_sampler(Gaussian{}, MomentTriple::proper(ComplexVec::Zero(M), R));
  RobustMvdrOptions ro;
  ro.scale = cfg.scale;
  ro.tol = cfg.tol;
  ro.backend = cfg.backend;

  std::vector<double> signal_power;
  for (double snr : cfg.snr_db) signal_power.push_back(cfg.model.noise_power * std::pow(10.0, snr / 10.0));

  std::map<CurveKey, Accum> curves;
  auto add = [&](const CurveKey& key, const BeamformerResult* res, const ComplexVec& actual) {
    Accum& acc = curves[key];
    if (acc.sum.empty()) acc.sum.assign(signal_power.size(), 0.0);
    if (!res || res->status != "optimal") {
      ++acc.failures;
      return;
    }
    ++acc.ok;
    for (std::size_t s = 0; s < signal_power.size(); ++s) acc.sum[s] += output_sinr(res->w, actual, R, signal_power[s]);
  };

  // Designs on the analytic covariance that do not depend on the trial.
  const BeamformerResult fixed_mvdr = mvdr_closed_form(R, a);
  const BeamformerResult fixed_gauss = robust_mvdr(R, a, mismatch, cfg.p, MvdrMode::Gaussian, ro);
  const BeamformerResult fixed_known = robust_mvdr(R, a, mismatch, cfg.p, MvdrMode::MomentExact, ro);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    auto rng = SeededStream{cfg.seed, 0}.substream(t).engine();
    const ComplexVec actual = a + delta_sampler.draw(1, rng).col(0);

    std::vector<EstimatedMoments> estimates;
    for (std::size_t e = 0; e < cfg.estimation_samples.size(); ++e) {
      const long long N = cfg.estimation_samples[e];
      if (N < 2) throw std::invalid_argument("estimation sample counts must be at least 2");
      auto erng = SeededStream{cfg.seed, 1 + e}.substream(t).engine();
      MomentAccumulator acc(M);
      for (long long done = 0; done < N; done += 8192)
        acc.add(delta_sampler.draw(static_cast<Index>(std::min<long long>(8192, N - done)), erng));
      estimates.push_back(attach_radii(acc.moments(), acc.max_norm(), acc.count(), cfg.delta));
    }

    const BeamformerResult optimal = mvdr_closed_form(R, actual);
    std::vector<std::pair<std::string, ComplexMat>> designs{{"analytic", R}};
    if (cfg.include_snapshot) {
      auto srng = SeededStream{cfg.seed, 0x5eed}.substream(t).engine();
      const ComplexMat X = snapshot_sampler.draw(cfg.snapshots, srng);
      ComplexMat Rhat = X * X.adjoint() / static_cast<double>(cfg.snapshots);
      Rhat = 0.5 * (Rhat + Rhat.adjoint()).eval();
      designs.emplace_back("snapshot", std::move(Rhat));
    }
    for (const auto& [name, Rd] : designs) {
      const bool analytic = name == "analytic";
      add({"optimal", 0, name}, &optimal, actual);
      try {
        const BeamformerResult mv = analytic ? fixed_mvdr : mvdr_closed_form(Rd, a);
        add({"mvdr_mismatched", 0, name}, &mv, actual);
      } catch (const std::exception&) {
        add({"mvdr_mismatched", 0, name}, nullptr, actual);
      }
      const BeamformerResult g = analytic ? fixed_gauss : robust_mvdr(Rd, a, mismatch, cfg.p, MvdrMode::Gaussian, ro);
      add({"true_gaussian", 0, name}, &g, actual);
      const BeamformerResult k =
          analytic ? fixed_known : robust_mvdr(Rd, a, mismatch, cfg.p, MvdrMode::MomentExact, ro);
      add({"known_moments", 0, name}, &k, actual);
      for (std::size_t e = 0; e < estimates.size(); ++e) {
        RobustMvdrOptions eo = ro;
        eo.r1 = estimates[e].r1;
        eo.r2 = estimates[e].r2;
        const BeamformerResult d = robust_mvdr(Rd, a, estimates[e].triple, cfg.p, MvdrMode::DataDriven, eo);
        add({"estimated_moments", cfg.estimation_samples[e], name}, &d, actual);
      }
    }
  }

  static const std::map<std::string, int> mode_order{
      {"optimal", 0}, {"mvdr_mismatched", 1}, {"true_gaussian", 2}, {"known_moments", 3}, {"estimated_moments", 4}};
  std::vector<std::pair<CurveKey, const Accum*>> ordered;
  for (const auto& [key, acc] : curves) ordered.emplace_back(key, &acc);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    const int cx = x.first.covariance == "analytic" ? 0 : 1;
    const int cy = y.first.covariance == "analytic" ? 0 : 1;
    return std::tuple(cx, mode_order.at(x.first.mode), x.first.samples) <
           std::tuple(cy, mode_order.at(y.first.mode), y.first.samples);
  });
  std::vector<SweepRow> rows;
  for (const auto& [key, acc] : ordered) {
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
      SweepRow row;
      row.mode = key.mode;
      row.samples = key.samples;
      row.covariance = key.covariance;
      row.snr_db = cfg.snr_db[s];
      row.trials = cfg.trials;
      row.failures = acc->failures;
      row.sinr_db = acc->ok > 0 ? 10.0 * std::log10(acc->sum[s] / acc->ok) : std::nan("");
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ccp3
