// Copyright 2026 The qsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsense/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "qsense/errors.hpp"

namespace qsense {

void RamseyTrace::validate() const {
  if (delays.size() != populations.size()) {
    throw ValidationError("trace: delays and populations differ in length");
  }
  if (delays.size() < 8) throw ValidationError("trace: at least 8 points are required");
  for (size_t k = 0; k < delays.size(); ++k) {
    if (!std::isfinite(delays[k]) || !std::isfinite(populations[k])) {
      throw ValidationError("trace: non-finite entry at index " + std::to_string(k));
    }
    if (populations[k] < -1e-9 || populations[k] > 1.0 + 1e-9) {
      throw ValidationError("trace: population outside [0, 1] at index " + std::to_string(k));
    }
    if (k > 0 && !(delays[k] > delays[k - 1])) {
      throw ValidationError("trace: delays must be strictly increasing");
    }
  }
}

}  // namespace qsense

namespace qsense::fitting {

namespace {

using Params = Eigen::Matrix<double, 7, 1>;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 7>;

enum Index { kA = 0, kRate = 1, kOmega = 2, kPhase = 3, kB = 4, kRateB = 5, kC = 6 };

constexpr double kTauCap = 1e12;
constexpr double kSigmaFloor = 1e-15;
constexpr double kPeriodGuard = 1.25;
// Longest offset decay, in trace windows. Beyond it the offset exponential
// and the constant become degenerate and the fit drifts along the valley.
constexpr double kOffsetTauWindows = 10.0;
constexpr double kStepPerSigma = 1e-3;

void residuals(const Params& p, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
               Eigen::VectorXd& r, Jacobian* jac) {
  const Eigen::Index n = t.size();
  r.resize(n);
  if (jac) jac->resize(n, 7);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double tk = t(k);
    const double e = std::exp(-p(kRate) * tk);
    const double arg = p(kOmega) * tk + p(kPhase);
    const double s = std::sin(arg);
    const double c = std::cos(arg);
    const double f = std::exp(-p(kRateB) * tk);
    r(k) = p(kA) * e * s + p(kB) * f + p(kC) - y(k);
    if (jac) {
      auto row = jac->row(k);
      row(kA) = e * s;
      row(kRate) = -tk * p(kA) * e * s;
      row(kOmega) = tk * p(kA) * e * c;
      row(kPhase) = p(kA) * e * c;
      row(kB) = f;
      row(kRateB) = -tk * p(kB) * f;
      row(kC) = 1.0;
    }
  }
}

// True when every component of the step is under a small fraction of that
// parameter's standard error. With a structured residual Gauss-Newton
// converges only linearly, and further steps change nothing measurable.
bool below_standard_error(const Params& delta, const Jacobian& jac, double cost, Eigen::Index n) {
  if (n <= 7) return false;
  const Eigen::Matrix<double, 7, 7> normal = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(normal);
  if (!lu.isInvertible()) return false;
  const Params var = lu.inverse().diagonal() * (cost / static_cast<double>(n - 7));
  for (int i = 0; i < 7; ++i) {
    if (!(var(i) > 0.0) || std::abs(delta(i)) > kStepPerSigma * std::sqrt(var(i))) return false;
  }
  return true;
}

struct LmOutcome {
  Params params;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

void clamp_rates(Params& p, double min_rate_b) {
  p(kRate) = std::max(p(kRate), 0.0);
  p(kRateB) = std::max(p(kRateB), min_rate_b);
}

LmOutcome levenberg_marquardt(Params p, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                              int max_iterations) {
  Eigen::VectorXd r;
  Jacobian jac;
  residuals(p, t, y, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  const double tiny = 1e-30 * static_cast<double>(t.size());
  const double min_rate_b = 1.0 / (kOffsetTauWindows * (t(t.size() - 1) - t(0)));

  LmOutcome out;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    out.iterations = iter;
    if (cost <= tiny) {
      out.converged = true;
      break;
    }
    const Eigen::Matrix<double, 7, 7> normal = jac.transpose() * jac;
    const Params grad = jac.transpose() * r;
    const double diag_floor = 1e-12 * std::max(normal.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::Matrix<double, 7, 7> damped = normal;
      for (int i = 0; i < 7; ++i) {
        damped(i, i) += lambda * std::max(normal(i, i), diag_floor);
      }
      Params rhs = -grad;
      // Parameters pinned at their bound with the descent pointing outward
      // are held fixed, so the clamp does not stall the other directions.
      const std::pair<int, double> bounds[] = {{kRate, 0.0}, {kRateB, min_rate_b}};
      for (const auto& [i, lo] : bounds) {
        if (p(i) <= lo && grad(i) > 0.0) {
          damped.row(i).setZero();
          damped.col(i).setZero();
          damped(i, i) = 1.0;
          rhs(i) = 0.0;
        }
      }
      const Params step = damped.ldlt().solve(rhs);
      Params trial = p + step;
      clamp_rates(trial, min_rate_b);
      Eigen::VectorXd r_trial;
      residuals(trial, t, y, r_trial, nullptr);
      const double cost_trial = r_trial.squaredNorm();
      if (step.allFinite() && std::isfinite(cost_trial) && cost_trial < cost) {
        const double gain = cost - cost_trial;
        const Params delta = trial - p;
        p = trial;
        residuals(p, t, y, r, &jac);
        cost = r.squaredNorm();
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (gain <= 1e-10 * cost || delta.norm() <= 1e-10 * (1.0 + p.norm()) ||
            below_standard_error(delta, jac, cost, t.size())) {
          out.converged = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e14) {
          // No descent direction left at machine precision: a minimum.
          stalled = true;
          break;
        }
      }
    }
    if (stalled) {
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.params = p;
  out.cost = cost;
  return out;
}

// Normalizes to omega >= 0, a >= 0 and phase in (-pi, pi].
void canonicalize(Params& p) {
  if (p(kOmega) < 0.0) {
    p(kOmega) = -p(kOmega);
    p(kPhase) = M_PI - p(kPhase);
  }
  if (p(kA) < 0.0) {
    p(kA) = -p(kA);
    p(kPhase) += M_PI;
  }
  p(kPhase) = std::remainder(p(kPhase), 2.0 * M_PI);
}

Params initial_guess(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double omega,
                     double window) {
  Params p;
  p(kA) = 0.5 * (y.maxCoeff() - y.minCoeff());
  p(kRate) = 1.0 / window;
  p(kOmega) = omega;
  p(kPhase) = M_PI / 2.0;
  p(kB) = 0.0;
  p(kRateB) = 1.0 / window;
  p(kC) = y.mean();
  // Amplitude and phase from a linear solve at the guessed frequency and
  // decay, which keeps the nonlinear search away from phase-flipped minima.
  Eigen::MatrixXd basis(t.size(), 3);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const double e = std::exp(-p(kRate) * t(k));
    basis(k, 0) = e * std::sin(omega * t(k));
    basis(k, 1) = e * std::cos(omega * t(k));
    basis(k, 2) = 1.0;
  }
  const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(y);
  if (lin.allFinite()) {
    const double amp = std::hypot(lin(0), lin(1));
    if (amp > 0.0) {
      p(kA) = amp;
      p(kPhase) = std::atan2(lin(1), lin(0));
      p(kC) = lin(2);
    }
  }
  return p;
}

DampedSineFit finish(const Params& p_raw, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                     int iterations) {
  Params p = p_raw;
  canonicalize(p);
  Eigen::VectorXd r;
  Jacobian jac;
  residuals(p, t, y, r, &jac);
  const double dof = static_cast<double>(t.size() - 7);
  const double s2 = r.squaredNorm() / dof;

  Eigen::JacobiSVD<Jacobian> svd(jac, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-12 * sv(0);
  Eigen::Matrix<double, 7, 1> inv_sq = Eigen::Matrix<double, 7, 1>::Zero();
  for (int i = 0; i < 7; ++i) {
    if (sv(i) > cutoff) inv_sq(i) = 1.0 / (sv(i) * sv(i));
  }
  const auto& v = svd.matrixV();

  DampedSineFit fit;
  fit.covariance = s2 * v * inv_sq.asDiagonal() * v.transpose();
  fit.omega_r = p(kOmega);
  fit.sigma_r = std::max(std::sqrt(std::max(fit.covariance(kOmega, kOmega), 0.0)), kSigmaFloor);
  fit.amplitude = p(kA);
  fit.decay_tau = p(kRate) > 1.0 / kTauCap ? 1.0 / p(kRate) : kTauCap;
  fit.phase0 = p(kPhase);
  fit.offset_amp = p(kB);
  fit.offset_tau = p(kRateB) > 1.0 / kTauCap ? 1.0 / p(kRateB) : kTauCap;
  fit.offset_const = p(kC);
  fit.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(t.size()));
  fit.iterations = iterations;
  return fit;
}

}  // namespace

double DampedSineFit::evaluate(double t) const {
  return amplitude * std::exp(-t / decay_tau) * std::sin(omega_r * t + phase0) +
         offset_amp * std::exp(-t / offset_tau) + offset_const;
}

double fourier_peak(const RamseyTrace& trace) {
  trace.validate();
  const size_t n = trace.size();
  const double window = trace.delays.back() - trace.delays.front();
  const double nyquist = M_PI * static_cast<double>(n - 1) / window;
  const size_t bins = 16 * n;
  double mean = 0.0;
  for (double p : trace.populations) mean += p;
  mean /= static_cast<double>(n);

  std::vector<double> power(bins + 1, 0.0);
  for (size_t m = 0; m <= bins; ++m) {
    const double w = nyquist * static_cast<double>(m) / static_cast<double>(bins);
    std::complex<double> acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
      acc += (trace.populations[k] - mean) *
             std::polar(1.0, -w * (trace.delays[k] - trace.delays.front()));
    }
    power[m] = std::norm(acc);
  }
  size_t best = 1;
  for (size_t m = 1; m <= bins; ++m) {
    if (power[m] > power[best]) best = m;
  }
  double offset = 0.0;
  if (best < bins) {
    const double a = power[best - 1];
    const double b = power[best];
    const double c = power[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  return nyquist * (static_cast<double>(best) + offset) / static_cast<double>(bins);
}

DampedSineFit fit_damped_sine(const RamseyTrace& trace, const FitOptions& options) {
  trace.validate();
  if (options.max_iterations < 1) throw ValidationError("fit: max_iterations must be positive");
  const auto n = static_cast<Eigen::Index>(trace.size());
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(trace.delays.data(), n);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(trace.populations.data(), n);
  const double window = t(n - 1) - t(0);

  if (y.maxCoeff() - y.minCoeff() < 1e-9) {
    // Flat trace: no oscillation at all, the shift is zero.
    Params p = Params::Zero();
    p(kC) = y.mean();
    DampedSineFit fit = finish(p, t, y, 0);
    fit.decay_tau = kTauCap;
    fit.offset_tau = kTauCap;
    return fit;
  }

  const double omega0 = options.omega_guess ? *options.omega_guess : fourier_peak(trace);
  const double periods = omega0 * window / (2.0 * M_PI);
  if (!options.allow_sub_period && periods < kPeriodGuard) {
    throw NoOscillationError("fit: dominant frequency spans " + std::to_string(periods) +
                             " periods, fewer than 1.25 within the window");
  }

  const double bin = 2.0 * M_PI / window;
  std::vector<double> starts{omega0};
  if (options.allow_sub_period) {
    for (int m = 1; m <= 16; ++m) starts.push_back(bin * 0.125 * m);
  }

  LmOutcome best;
  auto attempt = [&](double omega) {
    const LmOutcome o =
        levenberg_marquardt(initial_guess(t, y, omega, window), t, y, options.max_iterations);
    if (o.converged && o.cost < best.cost) best = o;
  };
  for (double w : starts) attempt(w);
  if (!best.converged) {
    attempt(omega0 + bin);
    attempt(std::max(omega0 - bin, 0.25 * bin));
  }
  if (!best.converged) {
    throw NumericError("fit: Levenberg-Marquardt did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
  }
  return finish(best.params, t, y, best.iterations);
}

ShiftMeasurement extract_shift(const DampedSineFit& fit, double gate_freq, double bare_freq,
                               int transition) {
  ShiftMeasurement m;
  m.transition = transition;
  m.gate_freq = gate_freq;
  m.bare_freq = bare_freq;
  m.delta = gate_freq == bare_freq ? fit.omega_r : fit.omega_r - (gate_freq - bare_freq);
  m.sigma = fit.sigma_r;
  return m;
}

namespace {

void check_scaling_points(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw ValidationError("sigma scaling: at least 4 points are required");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& [n, s] : points) {
    if (!(n >= 1.0) || !std::isfinite(s)) {
      throw ValidationError("sigma scaling: n_avg must be >= 1 and sigma finite");
    }
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  if (hi == lo) throw NumericError("sigma scaling: singular design, all n_avg are equal");
  if (hi < 10.0 * lo) throw ValidationError("sigma scaling: n_avg must span at least a decade");
}

}  // namespace

SigmaScaling fit_sigma_scaling(const std::vector<std::pair<double, double>>& points) {
  check_scaling_points(points);
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    design(k, 0) = 1.0 / std::sqrt(points[static_cast<size_t>(k)].first);
    design(k, 1) = 1.0;
    rhs(k) = points[static_cast<size_t>(k)].second;
  }
  const Eigen::Matrix2d normal = design.transpose() * design;
  const Eigen::Vector2d coef = normal.ldlt().solve(design.transpose() * rhs);
  const double dof = static_cast<double>(m - 2);
  const double s2 = (design * coef - rhs).squaredNorm() / dof;
  const Eigen::Matrix2d cov = s2 * normal.inverse();
  return {coef(0), coef(1), std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1))};
}

PowerLaw fit_power_law(const std::vector<std::pair<double, double>>& points) {
  check_scaling_points(points);
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& [n, s] = points[static_cast<size_t>(k)];
    if (!(s > 0.0)) throw ValidationError("power law: sigma values must be positive");
    design(k, 0) = std::log(n);
    design(k, 1) = 1.0;
    rhs(k) = std::log(s);
  }
  const Eigen::Matrix2d normal = design.transpose() * design;
  const Eigen::Vector2d coef = normal.ldlt().solve(design.transpose() * rhs);
  const double s2 = (design * coef - rhs).squaredNorm() / static_cast<double>(m - 2);
  const Eigen::Matrix2d cov = s2 * normal.inverse();
  return {std::exp(coef(1)), coef(0), std::sqrt(cov(0, 0))};
}

}  // namespace qsense::fitting
