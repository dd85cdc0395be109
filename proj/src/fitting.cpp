#include "odmr/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"

namespace odmr {

namespace {

enum DressedIndex : std::size_t {
  kD = 0,
  kEx,
  kRabiRf,
  kRabiMw,
  kGammaB,
  kGammaD,
  kAlpha,
  kSigmaEx,
};

}  // namespace

std::string_view to_string(FitFamily family) {
  return family == FitFamily::MultiLorentzian ? "multi_lorentzian" : "dressed_dip";
}

FitModel FitModel::multi_lorentzian(int peaks) {
  FitModel m;
  m.family = FitFamily::MultiLorentzian;
  m.peaks = peaks;
  return m;
}

FitModel FitModel::dressed_dip(double omega_rf, double rabi_mw, double mw_y_ratio,
                               bool fit_sigma_ex) {
  FitModel m;
  m.family = FitFamily::DressedDip;
  m.omega_rf = omega_rf;
  m.rabi_mw = rabi_mw;
  m.mw_y_ratio = mw_y_ratio;
  m.fit_sigma_ex = fit_sigma_ex;
  return m;
}

std::size_t FitModel::parameter_count() const {
  if (family == FitFamily::MultiLorentzian) return 1 + 3 * static_cast<std::size_t>(peaks);
  return fit_sigma_ex ? 8 : 7;
}

std::vector<std::string> FitModel::parameter_names() const {
  std::vector<std::string> names;
  if (family == FitFamily::MultiLorentzian) {
    names.push_back("baseline");
    for (int k = 0; k < peaks; ++k) {
      const std::string s = std::to_string(k);
      names.push_back("center_" + s);
      names.push_back("width_" + s);
      names.push_back("depth_" + s);
    }
    return names;
  }
  names = {"D", "ex", "rabi_rf", "rabi_mw", "gamma_b", "gamma_d", "alpha"};
  if (fit_sigma_ex) names.push_back("sigma_ex");
  return names;
}

bool FitModel::is_positive(std::size_t i) const {
  if (family == FitFamily::MultiLorentzian) return i == 0 || (i - 1) % 3 != 0;
  return i != kD && i != kEx;
}

bool FitModel::is_location(std::size_t i) const {
  if (family == FitFamily::MultiLorentzian) return i > 0 && (i - 1) % 3 == 0;
  return i == kD;
}

bool FitModel::is_fixed(std::size_t i) const {
  if (!fixed.empty()) return fixed.at(i);
  return family == FitFamily::DressedDip && i == kRabiMw;
}

int FitModel::expected_dips() const {
  if (family == FitFamily::MultiLorentzian) return peaks;
  return mw_y_ratio > 0.0 ? 4 : 2;
}

void FitModel::validate() const {
  if (family == FitFamily::MultiLorentzian && peaks < 1) {
    throw Error(ErrorCode::InvalidArgument, "fit model: peaks must be >= 1");
  }
  if (family == FitFamily::DressedDip) {
    if (omega_rf < 0.0 || mw_y_ratio < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "fit model: omega_rf and mw_y_ratio must be >= 0");
    }
    if (strain_nodes < 1 || strain_nodes % 2 == 0) {
      throw Error(ErrorCode::InvalidArgument, "fit model: strain_nodes must be odd");
    }
  }
  if (!fixed.empty() && fixed.size() != parameter_count()) {
    throw Error(ErrorCode::InvalidArgument, "fit model: fixed mask has wrong length");
  }
}

namespace {

DressedLineModel dressed_line(const FitModel& m, std::span<const double> p) {
  DressedLineModel line;
  line.env.d0 = p[kD];
  line.env.t0 = line.env.temperature = 300.0;
  line.env.ex = p[kEx];
  line.drive.omega_rf = m.omega_rf;
  line.drive.rabi_rf = p[kRabiRf];
  line.drive.rabi_mw = p[kRabiMw];
  line.drive.rabi_mw_y = m.mw_y_ratio * p[kRabiMw];
  line.decay = {p[kGammaB], p[kGammaD]};
  line.alpha = p[kAlpha];
  if (m.fit_sigma_ex) {
    line.strain = {p[kEx], p[kSigmaEx], m.strain_nodes};
  } else {
    line.strain = {p[kEx], 0.0, 1};
  }
  return line;
}

}  // namespace

double FitModel::evaluate(std::span<const double> p, double nu) const {
  if (family == FitFamily::MultiLorentzian) {
    double s = 1.0;
    for (int k = 0; k < peaks; ++k) {
      const double c = p[1 + 3 * k], h = 0.5 * p[2 + 3 * k], d = p[3 + 3 * k];
      const double x = nu - c;
      s -= d * h * h / (x * x + h * h);
    }
    return p[0] * s;
  }
  return dressed_line(*this, p).signal(nu);
}

double FitModel::feature_scale(std::span<const double> p) const {
  if (family == FitFamily::MultiLorentzian) {
    double w = std::numeric_limits<double>::infinity();
    for (int k = 0; k < peaks; ++k) w = std::min(w, p[2 + 3 * k]);
    return w;
  }
  // a rate drifting to zero along a flat direction carves no feature
  const double lo = std::min(p[kGammaB], p[kGammaD]);
  const double hi = std::max(p[kGammaB], p[kGammaD]);
  return std::max(lo, 1e-3 * hi);
}

std::vector<double> FitModel::dip_positions(std::span<const double> p) const {
  std::vector<double> out;
  if (family == FitFamily::MultiLorentzian) {
    for (int k = 0; k < peaks; ++k) out.push_back(p[1 + 3 * k]);
    std::sort(out.begin(), out.end());
    return out;
  }
  if (mw_y_ratio > 0.0) {
    const auto res = dressed_resonances(p[kD], p[kEx], omega_rf, p[kRabiRf]);
    return {res.begin(), res.end()};
  }
  // bright channel alone: the +omega_rf pair
  const double root = std::hypot(2.0 * p[kEx] - omega_rf, p[kRabiRf]);
  return {p[kD] + 0.5 * (omega_rf - root), p[kD] + 0.5 * (omega_rf + root)};
}

std::vector<std::optional<double>> FitResult::fwhm_per_peak() const {
  std::vector<std::optional<double>> out;
  for (const auto& d : dips) out.push_back(d.fwhm);
  return out;
}

std::vector<double> FitResult::contrast_per_peak() const {
  std::vector<double> out;
  for (const auto& d : dips) out.push_back(d.contrast);
  return out;
}

std::vector<double> FitResult::uncertainties() const {
  std::vector<double> out(static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::sqrt(std::max(covariance(i, i), 0.0));
  }
  return out;
}

std::size_t FitResult::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "fit result has no parameter '" +
                                              std::string(name) + "'");
}

double FitResult::value(std::string_view name) const {
  return params(static_cast<Eigen::Index>(index_of(name)));
}

double FitResult::sigma(std::string_view name) const {
  const auto i = static_cast<Eigen::Index>(index_of(name));
  return std::sqrt(std::max(covariance(i, i), 0.0));
}

double FitResult::evaluate(double nu) const {
  return model.evaluate(std::span<const double>(params.data(), params.size()), nu);
}

// ---------------------------------------------------------------------------
// initial guess
// ---------------------------------------------------------------------------

namespace {

struct DetectedDip {
  std::size_t index = 0;
  double center = 0.0;
  double depth = 0.0;
  double prominence = 0.0;
  double fwhm = 0.0;
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t half) {
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += y[k];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double half_depth_crossing(const std::vector<double>& x, const std::vector<double>& s,
                           std::size_t i0, double level, int dir, bool& found) {
  found = false;
  std::size_t i = i0;
  while (true) {
    if ((dir < 0 && i == 0) || (dir > 0 && i + 1 >= s.size())) return x[i];
    const std::size_t j = dir < 0 ? i - 1 : i + 1;
    if (s[j] >= level) {
      found = true;
      const double t = (level - s[i]) / (s[j] - s[i]);
      return x[i] + t * (x[j] - x[i]);
    }
    i = j;
  }
}

std::vector<DetectedDip> detect_dips(const Spectrum& spec, std::size_t wanted,
                                     double& baseline) {
  const std::size_t n = spec.size();
  baseline = quantile(spec.signal, 0.75);
  const std::size_t half = std::max<std::size_t>(1, n / 300);
  const std::vector<double> s = moving_average(spec.signal, half);

  double noise = 0.0;
  if (spec.has_weights()) {
    noise = quantile(spec.sigma, 0.5);
  } else {
    std::vector<double> diffs;
    for (std::size_t i = 1; i < n; ++i) diffs.push_back(std::abs(spec.signal[i] - spec.signal[i - 1]));
    noise = quantile(diffs, 0.5) / (0.6745 * std::sqrt(2.0));
  }
  noise /= std::sqrt(static_cast<double>(2 * half + 1));
  const double global_min = *std::min_element(s.begin(), s.end());
  const double max_depth = baseline - global_min;
  const double threshold = std::max(5.0 * noise, 0.02 * max_depth);

  std::vector<DetectedDip> dips;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s[i] < s[i - 1] && s[i] <= s[i + 1])) continue;
    double left_max = s[i], right_max = s[i];
    for (std::size_t k = i; k-- > 0;) {
      if (s[k] < s[i]) break;
      left_max = std::max(left_max, s[k]);
    }
    for (std::size_t k = i + 1; k < n; ++k) {
      if (s[k] < s[i]) break;
      right_max = std::max(right_max, s[k]);
    }
    const double prominence = std::min(left_max, right_max) - s[i];
    if (prominence < threshold) continue;
    DetectedDip d;
    d.index = i;
    d.center = spec.frequencies[i];
    d.depth = baseline - s[i];
    d.prominence = prominence;
    dips.push_back(d);
  }
  if (dips.size() < wanted) {
    throw Error(ErrorCode::PeakDetection,
                "initial_guess: found " + std::to_string(dips.size()) + " dip(s), " +
                    std::to_string(wanted) + " requested");
  }
  std::sort(dips.begin(), dips.end(),
            [](const DetectedDip& a, const DetectedDip& b) { return a.prominence > b.prominence; });
  dips.resize(wanted);
  std::sort(dips.begin(), dips.end(),
            [](const DetectedDip& a, const DetectedDip& b) { return a.center < b.center; });

  const double span = spec.frequencies.back() - spec.frequencies.front();
  for (auto& d : dips) {
    // sub-sample center from a parabola through the smoothed minimum
    const std::size_t i = d.index;
    const double denom = s[i - 1] - 2.0 * s[i] + s[i + 1];
    if (denom > 0.0) {
      const double off = 0.5 * (s[i - 1] - s[i + 1]) / denom;
      const double dx = 0.5 * (spec.frequencies[i + 1] - spec.frequencies[i - 1]);
      d.center += std::clamp(off, -0.5, 0.5) * dx;
    }
    const double level = baseline - 0.5 * d.depth;
    bool found_l = false, found_r = false;
    const double l = half_depth_crossing(spec.frequencies, s, i, level, -1, found_l);
    const double r = half_depth_crossing(spec.frequencies, s, i, level, +1, found_r);
    if (found_l && found_r) d.fwhm = r - l;
    else if (found_l) d.fwhm = 2.0 * (d.center - l);
    else if (found_r) d.fwhm = 2.0 * (r - d.center);
    else d.fwhm = span / 10.0;
    const double step = span / static_cast<double>(n - 1);
    d.fwhm = std::max(d.fwhm, step);
  }
  return dips;
}

}  // namespace

std::vector<double> initial_guess(const Spectrum& spec, const FitModel& model) {
  model.validate();
  spec.validate();
  if (spec.size() < 10) {
    throw Error(ErrorCode::InvalidArgument, "initial_guess: spectrum needs >= 10 points");
  }
  double baseline = 1.0;
  auto wanted = static_cast<std::size_t>(model.expected_dips());
  std::vector<DetectedDip> dips;
  try {
    dips = detect_dips(spec, wanted, baseline);
  } catch (const Error&) {
    // an unresolved dressed pair shows up as one dip
    if (model.family != FitFamily::DressedDip) throw;
    wanted /= 2;
    dips = detect_dips(spec, wanted, baseline);
  }

  std::vector<double> p(model.parameter_count(), 0.0);
  if (model.family == FitFamily::MultiLorentzian) {
    p[0] = baseline;
    for (std::size_t k = 0; k < dips.size(); ++k) {
      p[1 + 3 * k] = dips[k].center;
      p[2 + 3 * k] = dips[k].fwhm;
      p[3 + 3 * k] = std::max(dips[k].depth / baseline, 1e-6);
    }
    return p;
  }

  if (!(model.rabi_mw > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "initial_guess: dressed model needs the applied rabi_mw");
  }
  double mean_width = 0.0;
  for (const auto& d : dips) mean_width += d.fwhm;
  mean_width /= static_cast<double>(dips.size());

  double root = 0.0;
  double d_guess = 0.0;
  const bool merged = static_cast<int>(dips.size()) < model.expected_dips();
  if (dips.size() == 4) {
    d_guess = 0.25 * (dips[0].center + dips[1].center + dips[2].center + dips[3].center);
    root = 0.5 * ((dips[3].center - dips[2].center) + (dips[1].center - dips[0].center));
  } else if (dips.size() == 2 && !merged) {
    d_guess = 0.5 * (dips[0].center + dips[1].center) - 0.5 * model.omega_rf;
    root = dips[1].center - dips[0].center;
  } else {
    double mean = 0.0;
    for (const auto& d : dips) mean += d.center;
    mean /= static_cast<double>(dips.size());
    d_guess = dips.size() == 2 ? mean : mean - 0.5 * model.omega_rf;
    root = 0.5 * mean_width;
  }
  p[kD] = d_guess;
  p[kRabiMw] = model.rabi_mw;
  p[kAlpha] = 1.0;

  // The splitting is sqrt(delta^2 + rabi_rf^2) with delta = 2 ex - omega_rf;
  // the dip weights decide how it divides, so several divisions are scored.
  std::vector<std::pair<double, double>> splits;  // (ex, rabi_rf)
  if (model.omega_rf == 0.0) {
    splits = {{0.5 * root, 0.1 * root}};
  } else if (merged) {
    splits = {{0.5 * model.omega_rf, root}};
  } else {
    for (double f : {0.0, 0.3, 0.6, 0.85}) {
      const double delta = f * root;
      const double rabi = std::sqrt(1.0 - f * f) * root;
      splits.emplace_back(0.5 * (model.omega_rf + delta), rabi);
      if (f > 0.0) splits.emplace_back(0.5 * (model.omega_rf - delta), rabi);
    }
  }
  const double rabi_rf = splits.front().second;

  // Widths alone cannot split homogeneous from strain broadening, so score a
  // small set of starting shapes. alpha enters linearly and is solved for.
  const double omega = std::max(rabi_rf, mean_width);
  std::vector<double> gb_share = {1.0, 0.5, 0.2};
  std::vector<double> gd_ratio = {0.02, 0.1, 0.5};
  std::vector<double> sigmas = {0.0};
  if (model.fit_sigma_ex) {
    const double s0 = std::sqrt(mean_width * omega);
    sigmas = {0.1 * s0, 0.3 * s0, s0, 3.0 * s0};
  }
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best = p;
  std::vector<double> dep(spec.size());
  for (const auto& [ex, rabi] : splits) {
    for (double share : gb_share) {
      for (double ratio : gd_ratio) {
        for (double sig : sigmas) {
          std::vector<double> q = p;
          q[kEx] = ex;
          q[kRabiRf] = std::max(rabi, 1e-3);
          q[kGammaB] = std::max(share * mean_width / 1.1, 1e-6);
          q[kGammaD] = ratio * q[kGammaB];
          if (model.fit_sigma_ex) q[kSigmaEx] = sig;
          q[kAlpha] = 1.0;
          double sdd = 0.0, sdy = 0.0;
          for (std::size_t i = 0; i < spec.size(); ++i) {
            dep[i] = 1.0 - model.evaluate(q, spec.frequencies[i]);
            sdd += dep[i] * dep[i];
            sdy += dep[i] * (1.0 - spec.signal[i]);
          }
          if (!(sdd > 0.0) || !(sdy > 0.0)) continue;
          q[kAlpha] = sdy / sdd;
          double cost = 0.0;
          for (std::size_t i = 0; i < spec.size(); ++i) {
            const double r = 1.0 - q[kAlpha] * dep[i] - spec.signal[i];
            cost += r * r;
          }
          if (cost < best_cost) {
            best_cost = cost;
            best = q;
          }
        }
      }
    }
  }
  if (!std::isfinite(best_cost)) {
    throw Error(ErrorCode::PeakDetection, "initial_guess: no starting shape matches the dips");
  }
  return best;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

namespace {

// Maps the free external parameters to an unconstrained internal vector:
// log for positive parameters, offset from the guess for locations.
struct Parameterisation {
  const FitModel& model;
  std::vector<double> base;  // full external vector, fixed values included
  std::vector<std::size_t> free;

  Eigen::VectorXd to_internal(std::span<const double> ext) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t i = free[k];
      if (model.is_positive(i)) x(k) = std::log(ext[i]);
      else if (model.is_location(i)) x(k) = ext[i] - base[i];
      else x(k) = ext[i];
    }
    return x;
  }

  std::vector<double> to_external(const Eigen::VectorXd& x) const {
    std::vector<double> ext = base;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t i = free[k];
      if (model.is_positive(i)) ext[i] = std::exp(x(k));
      else if (model.is_location(i)) ext[i] = base[i] + x(k);
      else ext[i] = x(k);
    }
    return ext;
  }

  // d ext / d internal
  double derivative(std::size_t k, const std::vector<double>& ext) const {
    return model.is_positive(free[k]) ? ext[free[k]] : 1.0;
  }
};

}  // namespace

FitResult fit(const Spectrum& spec, const FitModel& model, std::span<const double> guess,
              const FitOptions& options) {
  model.validate();
  spec.validate();
  const std::size_t np = model.parameter_count();
  if (guess.size() != np) {
    throw Error(ErrorCode::InvalidArgument, "fit: guess has " + std::to_string(guess.size()) +
                                                " entries, model needs " + std::to_string(np));
  }
  for (std::size_t i = 0; i < np; ++i) {
    if (!std::isfinite(guess[i]) || (model.is_positive(i) && !(guess[i] > 0.0))) {
      throw Error(ErrorCode::InvalidArgument,
                  "fit: guess out of bounds for " + model.parameter_names()[i]);
    }
  }

  Parameterisation par{model, std::vector<double>(guess.begin(), guess.end()), {}};
  for (std::size_t i = 0; i < np; ++i) {
    if (!model.is_fixed(i)) par.free.push_back(i);
  }

  const bool weighted = spec.has_weights();
  const auto m = static_cast<Eigen::Index>(spec.size());
  ResidualFn residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const std::vector<double> ext = par.to_external(x);
    try {
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double w = weighted ? spec.sigma[u] : 1.0;
        r(i) = (model.evaluate(ext, spec.frequencies[u]) - spec.signal[u]) / w;
      }
    } catch (const Error&) {
      // e.g. a rate underflowing to zero; the optimiser rejects the step
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  };

  const Eigen::VectorXd x0 = par.to_internal(guess);
  LmResult best = levenberg_marquardt(residual, x0, m, options.lm);
  if (options.multi_start > 1) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double loc_scale = model.feature_scale(guess);
    for (int s = 1; s < options.multi_start; ++s) {
      Eigen::VectorXd xs = x0;
      for (std::size_t k = 0; k < par.free.size(); ++k) {
        const std::size_t i = par.free[k];
        if (model.is_positive(i)) xs(k) += 0.2 * normal(rng);
        else if (model.is_location(i)) xs(k) += 0.5 * loc_scale * normal(rng);
        else xs(k) += 0.1 * std::max(std::abs(xs(k)), loc_scale) * normal(rng);
      }
      try {
        LmResult trial = levenberg_marquardt(residual, xs, m, options.lm);
        if (trial.cost < best.cost) best = std::move(trial);
      } catch (const Error&) {
        // a failed restart leaves the incumbent in place
      }
    }
  }

  FitResult out;
  out.model = model;
  out.names = model.parameter_names();
  const std::vector<double> ext = par.to_external(best.x);
  out.params = Eigen::Map<const Eigen::VectorXd>(ext.data(), static_cast<Eigen::Index>(np));
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.message = best.message;
  out.points = spec.size();
  out.span_lo = spec.frequencies.front();
  out.span_hi = spec.frequencies.back();

  double sq = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double d = model.evaluate(ext, spec.frequencies[i]) - spec.signal[i];
    sq += d * d;
  }
  out.residual_rms = std::sqrt(sq / static_cast<double>(spec.size()));
  out.chi2 = 2.0 * best.cost;

  // covariance of the internal free parameters, mapped to external ones
  const auto k = static_cast<Eigen::Index>(par.free.size());
  out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                         static_cast<Eigen::Index>(np));
  if (k > 0) {
    const Eigen::MatrixXd info = best.jacobian.transpose() * best.jacobian;
    Eigen::MatrixXd cov_int = info.completeOrthogonalDecomposition().pseudoInverse();
    if (!weighted && m > k) {
      cov_int *= out.chi2 / static_cast<double>(m - k);
    }
    Eigen::VectorXd t(k);
    for (Eigen::Index a = 0; a < k; ++a) t(a) = par.derivative(static_cast<std::size_t>(a), ext);
    const Eigen::MatrixXd cov_ext_free = t.asDiagonal() * cov_int * t.asDiagonal();
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        out.covariance(static_cast<Eigen::Index>(par.free[a]),
                       static_cast<Eigen::Index>(par.free[b])) = cov_ext_free(a, b);
      }
    }
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  }

  if (out.converged && model.family == FitFamily::DressedDip) {
    // p0 < 0 at a resonance means the fit sits outside linear response
    std::vector<double> unit = ext;
    unit[kAlpha] = 1.0;
    for (double nu : model.dip_positions(ext)) {
      if (1.0 - model.evaluate(unit, nu) > 1.0) {
        out.converged = false;
        out.message = "fitted parameters leave the linear-response range (p0 < 0)";
        break;
      }
    }
  }
  if (out.converged) {
    try {
      out.dips = extract_linewidth(out, model);
    } catch (const Error& e) {
      out.message += std::string("; linewidth extraction failed: ") + e.what();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// linewidths
// ---------------------------------------------------------------------------

namespace {

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 100 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// walks from x0 in direction dir until curve >= level; nullopt with reason if
// another dip starts first or no crossing exists within the walk budget
std::optional<double> walk_to_level(const std::function<double(double)>& curve, double x0,
                                    double level, double step, int dir, double depth,
                                    std::string& reason) {
  double x = x0, fx = curve(x0);
  const double slack = 1e-9 * depth;
  for (int i = 0; i < 200000; ++i) {
    const double xn = x + dir * step;
    const double fn = curve(xn);
    if (fn >= level) {
      double lo = x, hi = xn;  // curve(lo) < level <= curve(hi)
      for (int b = 0; b < 100; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (curve(mid) >= level) hi = mid;
        else lo = mid;
      }
      return 0.5 * (lo + hi);
    }
    if (fn < fx - slack) {
      reason = "unresolved: neighbouring dip before half depth";
      return std::nullopt;
    }
    x = xn;
    fx = fn;
  }
  reason = "unresolved: no half-depth crossing";
  return std::nullopt;
}

}  // namespace

DipWidth measure_dip(const std::function<double(double)>& curve, double position,
                     double scale, double search, double baseline) {
  if (!(scale > 0.0) || !(search > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "measure_dip: scale and search must be > 0");
  }
  DipWidth out;
  // coarse scan then golden-section polish of the minimum
  constexpr int kScan = 800;
  const double lo = position - search, hi = position + search;
  const double h = (hi - lo) / kScan;
  double best_x = position, best_f = curve(position);
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + h * i;
    const double f = curve(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  out.center = golden_min(curve, std::max(lo, best_x - h), std::min(hi, best_x + h));
  const double fmin = curve(out.center);
  out.contrast = baseline - fmin;
  if (!(out.contrast > 0.0)) {
    out.reason = "no dip";
    return out;
  }
  const double level = baseline - 0.5 * out.contrast;
  const double step = std::min(scale / 50.0, search / 50.0);
  std::string reason;
  const auto right = walk_to_level(curve, out.center, level, step, +1, out.contrast, reason);
  if (!right) {
    out.reason = reason;
    return out;
  }
  const auto left = walk_to_level(curve, out.center, level, step, -1, out.contrast, reason);
  if (!left) {
    out.reason = reason;
    return out;
  }
  out.fwhm = *right - *left;
  return out;
}

std::vector<DipWidth> extract_linewidth(const FitResult& result, const FitModel& model) {
  if (!result.converged) {
    throw Error(ErrorCode::FitFailure, "extract_linewidth: fit did not converge");
  }
  const std::span<const double> p(result.params.data(),
                                  static_cast<std::size_t>(result.params.size()));
  std::vector<DipWidth> out;
  if (model.family == FitFamily::MultiLorentzian) {
    for (int k = 0; k < model.peaks; ++k) {
      DipWidth d;
      d.center = p[1 + 3 * k];
      d.fwhm = p[2 + 3 * k];
      d.contrast = p[3 + 3 * k];
      out.push_back(d);
    }
    return out;
  }

  const auto curve = [&](double nu) { return model.evaluate(p, nu); };
  const std::vector<double> pos = model.dip_positions(p);
  double scale = 0.5 * (p[kGammaB] + p[kGammaD]);
  if (model.fit_sigma_ex) scale = std::max(scale, p[kSigmaEx]);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = std::min(gap, pos[i] - pos[i - 1]);
    if (i + 1 < pos.size()) gap = std::min(gap, pos[i + 1] - pos[i]);
    if (!(gap > 0.0)) {
      DipWidth d;
      d.center = pos[i];
      d.reason = "unresolved: coincident resonances";
      out.push_back(d);
      continue;
    }
    const double search = std::min(3.0 * scale, 0.45 * gap);
    out.push_back(measure_dip(curve, pos[i], std::min(scale, search), search));
  }
  // two expected dips converging on one minimum are not resolved
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    const double tol = 1e-3 * scale;
    if (std::abs(out[i].center - out[i + 1].center) < tol) {
      for (std::size_t j : {i, i + 1}) {
        out[j].fwhm.reset();
        out[j].reason = "unresolved: merged with neighbouring dip";
      }
    }
  }
  return out;
}

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json params = nlohmann::json::array();
  const auto unc = r.uncertainties();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    params.push_back({{"name", r.names[i]},
                      {"value", r.params(static_cast<Eigen::Index>(i))},
                      {"sigma", unc[i]},
                      {"fixed", r.model.is_fixed(i)}});
  }
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.covariance.cols()));
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = r.covariance(i, j);
    }
    cov.push_back(row);
  }
  nlohmann::json dips = nlohmann::json::array();
  for (const auto& d : r.dips) {
    nlohmann::json e = {{"center_mhz", d.center}, {"contrast", d.contrast}};
    e["fwhm_mhz"] = d.fwhm ? nlohmann::json(*d.fwhm) : nlohmann::json(nullptr);
    if (!d.reason.empty()) e["reason"] = d.reason;
    dips.push_back(e);
  }
  nlohmann::json model = {{"family", to_string(r.model.family)}};
  if (r.model.family == FitFamily::MultiLorentzian) {
    model["peaks"] = r.model.peaks;
  } else {
    model["omega_rf"] = r.model.omega_rf;
    model["mw_y_ratio"] = r.model.mw_y_ratio;
    model["fit_sigma_ex"] = r.model.fit_sigma_ex;
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "fit_result"},
          {"model", model},
          {"parameters", params},
          {"covariance", cov},
          {"dips", dips},
          {"residual_rms", r.residual_rms},
          {"chi2", r.chi2},
          {"points", r.points},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"message", r.message}};
}

}  // namespace odmr
