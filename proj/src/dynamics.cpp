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

#include "qsense/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsense/errors.hpp"

namespace qsense::dynamics {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr int kPhasorResync = 1024;
constexpr double kNormDriftLimit = 1e-6;

// One exponential component of an off-diagonal Hamiltonian element:
// H(row, col) += coeff * exp(i * rate * t), with row < col; the (col, row)
// element receives the conjugate.
struct Term {
  int row;
  int col;
  Complex coeff;
  double rate;
};

// Single-element collapse operator amp * |row><col|.
struct Collapse {
  int row;
  int col;
  double amp;
};

struct Generator {
  Eigen::VectorXd diag;
  std::vector<Term> terms;
};

Generator build_generator(const QuditOperators& ops, const Eigen::VectorXd& frame_rates,
                          const std::vector<DriveTone>& tones, bool counter_rotating) {
  const int d = ops.dim();
  Generator g;
  g.diag = ops.energies - frame_rates;
  const double scale = ops.coupling.cwiseAbs().maxCoeff();
  for (const DriveTone& tone : tones) {
    if (tone.amplitude == 0.0) continue;
    const Complex up = std::polar(1.0, tone.phase);
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        const double c = ops.coupling(i, j);
        if (std::abs(c) <= 1e-14 * scale) continue;
        const bool ladder = (j == i + 1);
        if (!counter_rotating && !ladder) continue;
        const double half = 0.5 * tone.amplitude * c;
        const double shift = frame_rates(i) - frame_rates(j);
        g.terms.push_back({i, j, half * up, tone.frequency + shift});
        if (counter_rotating) {
          g.terms.push_back({i, j, half * std::conj(up), -tone.frequency + shift});
        }
      }
    }
  }
  return g;
}

double fastest_rate(const Generator& g) {
  double diag_max = g.diag.cwiseAbs().maxCoeff();
  double rate_max = 0.0;
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(g.diag.size());
  for (const Term& t : g.terms) {
    rate_max = std::max(rate_max, std::abs(t.rate));
    row_sum(t.row) += std::abs(t.coeff);
    row_sum(t.col) += std::abs(t.coeff);
  }
  return diag_max + rate_max + row_sum.maxCoeff();
}

std::vector<Collapse> build_collapse(const DissipationSpec& spec, int dim) {
  std::vector<Collapse> out;
  for (int i = 1; i < dim; ++i) {
    const auto idx = static_cast<size_t>(i);
    if (idx < spec.relaxation.size() && std::isfinite(spec.relaxation[idx])) {
      out.push_back({i - 1, i, std::sqrt(1.0 / spec.relaxation[idx])});
    }
    if (idx < spec.dephasing.size() && std::isfinite(spec.dephasing[idx])) {
      out.push_back({i, i, std::sqrt(2.0 / spec.dephasing[idx])});
    }
  }
  return out;
}

class Stepper {
 public:
  Stepper(const Generator& gen, std::vector<Collapse> collapse, double t0, double h)
      : gen_(gen), collapse_(std::move(collapse)), t0_(t0), h_(h) {
    const auto n = gen_.terms.size();
    phasor_.resize(n);
    half_.resize(n);
    for (size_t k = 0; k < n; ++k) {
      half_[k] = std::polar(1.0, 0.5 * gen_.terms[k].rate * h_);
    }
    const int d = static_cast<int>(gen_.diag.size());
    h_start_.resize(d, d);
    h_mid_.resize(d, d);
    h_end_.resize(d, d);
    resync(0);
  }

  void step_pure(Eigen::VectorXcd& psi, long step_index) {
    if (step_index % kPhasorResync == 0) resync(step_index);
    assemble();
    k1_ = -kI * (h_start_ * psi);
    tmp_ = psi + 0.5 * h_ * k1_;
    k2_ = -kI * (h_mid_ * tmp_);
    tmp_ = psi + 0.5 * h_ * k2_;
    k3_ = -kI * (h_mid_ * tmp_);
    tmp_ = psi + h_ * k3_;
    k4_ = -kI * (h_end_ * tmp_);
    psi += (h_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    advance();
  }

  void step_mixed(Eigen::MatrixXcd& rho, long step_index) {
    if (step_index % kPhasorResync == 0) resync(step_index);
    assemble();
    lindblad(h_start_, rho, m1_);
    mtmp_ = rho + 0.5 * h_ * m1_;
    lindblad(h_mid_, mtmp_, m2_);
    mtmp_ = rho + 0.5 * h_ * m2_;
    lindblad(h_mid_, mtmp_, m3_);
    mtmp_ = rho + h_ * m3_;
    lindblad(h_end_, mtmp_, m4_);
    rho += (h_ / 6.0) * (m1_ + 2.0 * m2_ + 2.0 * m3_ + m4_);
    advance();
  }

 private:
  void resync(long step_index) {
    const double t = t0_ + static_cast<double>(step_index) * h_;
    for (size_t k = 0; k < gen_.terms.size(); ++k) {
      phasor_[k] = std::polar(1.0, gen_.terms[k].rate * t);
    }
  }

  void assemble() {
    h_start_.setZero();
    h_start_.diagonal() = gen_.diag.cast<Complex>();
    h_mid_ = h_start_;
    h_end_ = h_start_;
    for (size_t k = 0; k < gen_.terms.size(); ++k) {
      const Term& t = gen_.terms[k];
      const Complex z0 = t.coeff * phasor_[k];
      const Complex zm = z0 * half_[k];
      const Complex z1 = zm * half_[k];
      h_start_(t.row, t.col) += z0;
      h_mid_(t.row, t.col) += zm;
      h_end_(t.row, t.col) += z1;
    }
    // Fill the lower triangle from the upper one.
    for (auto* m : {&h_start_, &h_mid_, &h_end_}) {
      const int d = static_cast<int>(m->rows());
      for (int r = 0; r < d; ++r) {
        for (int c = r + 1; c < d; ++c) (*m)(c, r) = std::conj((*m)(r, c));
      }
    }
  }

  void advance() {
    for (size_t k = 0; k < phasor_.size(); ++k) phasor_[k] *= half_[k] * half_[k];
  }

  void lindblad(const Eigen::MatrixXcd& ham, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
    out.noalias() = -kI * (ham * rho);
    out.noalias() += kI * (rho * ham);
    for (const Collapse& l : collapse_) {
      const double rate = l.amp * l.amp;
      out(l.row, l.row) += rate * rho(l.col, l.col);
      out.row(l.col) -= 0.5 * rate * rho.row(l.col);
      out.col(l.col) -= 0.5 * rate * rho.col(l.col);
    }
  }

  const Generator& gen_;
  std::vector<Collapse> collapse_;
  double t0_;
  double h_;
  std::vector<Complex> phasor_;
  std::vector<Complex> half_;
  Eigen::MatrixXcd h_start_, h_mid_, h_end_;
  Eigen::VectorXcd k1_, k2_, k3_, k4_, tmp_;
  Eigen::MatrixXcd m1_, m2_, m3_, m4_, mtmp_;
};

std::vector<DriveTone> active_tones(const Sequence& seq, const Segment& seg) {
  std::vector<DriveTone> tones;
  if (seq.field) tones.push_back(*seq.field);
  if (seg.gate) tones.push_back(*seg.gate);
  return tones;
}

double choose_step(const Generator& gen, const EvolveOptions& options) {
  if (options.dt > 0.0) return options.dt;
  const double nu = fastest_rate(gen);
  return nu > 0.0 ? std::min(options.max_dt, options.step_safety / nu) : options.max_dt;
}

}  // namespace

void DriveTone::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw ValidationError("drive tone: amplitude must be finite and >= 0");
  }
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw ValidationError("drive tone: frequency must be finite and > 0");
  }
  if (!std::isfinite(phase)) throw ValidationError("drive tone: phase must be finite");
}

double Sequence::total_duration() const {
  double total = 0.0;
  for (const Segment& s : segments) total += s.duration;
  return total;
}

void Sequence::validate(int dim) const {
  for (const Segment& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw ValidationError("sequence: segment durations must be positive");
    }
    if (s.gate) s.gate->validate();
  }
  if (field) field->validate();
  if (measure_level < 0 || measure_level >= dim) {
    throw ValidationError("sequence: measure_level must lie in [0, d_keep)");
  }
}

QuditOperators QuditOperators::from(const transmon::Diagonalization& diag) {
  QuditOperators ops;
  const auto& e = diag.spectrum.energies;
  ops.energies.resize(static_cast<Eigen::Index>(e.size()));
  for (size_t i = 0; i < e.size(); ++i) {
    ops.energies(static_cast<Eigen::Index>(i)) = 2.0 * M_PI * e[i];
  }
  ops.coupling = diag.coupling.matrix;
  return ops;
}

QuditOperators QuditOperators::truncated(int dim) const {
  if (dim < 2 || dim > this->dim()) throw ValidationError("truncated: invalid dimension");
  return {energies.head(dim), coupling.topLeftCorner(dim, dim)};
}

void DissipationSpec::validate(int dim) const {
  for (const auto* v : {&relaxation, &dephasing}) {
    if (v->size() > static_cast<size_t>(dim)) {
      throw ValidationError("dissipation: more entries than levels");
    }
    for (size_t i = 1; i < v->size(); ++i) {
      const double t = (*v)[i];
      if (std::isfinite(t) && !(t > 0.0)) {
        throw ValidationError("dissipation: decay times must be positive");
      }
    }
  }
}

bool DissipationSpec::empty() const {
  auto none = [](const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i) {
      if (std::isfinite(v[i])) return false;
    }
    return true;
  };
  return none(relaxation) && none(dephasing);
}

QuditState QuditState::basis(int dim, int level) {
  if (level < 0 || level >= dim) throw ValidationError("basis state: level out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(level) = 1.0;
  return pure(std::move(v));
}

QuditState QuditState::pure(Eigen::VectorXcd amplitudes) {
  QuditState s;
  s.pure_ = true;
  s.psi_ = std::move(amplitudes);
  return s;
}

QuditState QuditState::mixed(Eigen::MatrixXcd density) {
  if (density.rows() != density.cols()) throw ValidationError("density matrix must be square");
  QuditState s;
  s.pure_ = false;
  s.rho_ = std::move(density);
  return s;
}

int QuditState::dim() const {
  return static_cast<int>(pure_ ? psi_.size() : rho_.rows());
}

const Eigen::VectorXcd& QuditState::amplitudes() const {
  if (!pure_) throw Error("state is a density matrix");
  return psi_;
}

const Eigen::MatrixXcd& QuditState::density() const {
  if (pure_) throw Error("state is a pure vector");
  return rho_;
}

QuditState QuditState::as_density() const {
  if (!pure_) return *this;
  return mixed(psi_ * psi_.adjoint());
}

Eigen::VectorXd QuditState::populations() const {
  if (pure_) return psi_.cwiseAbs2();
  return rho_.diagonal().real();
}

double QuditState::projection(const Eigen::VectorXcd& v) const {
  if (pure_) return std::norm(v.dot(psi_));
  return (v.adjoint() * rho_ * v)(0, 0).real();
}

double QuditState::weight() const {
  return pure_ ? psi_.squaredNorm() : rho_.trace().real();
}

void QuditState::check(double tol) const {
  const double w = weight();
  if (!std::isfinite(w) || std::abs(w - 1.0) > tol) {
    throw NumericError("state normalization off by " + std::to_string(w - 1.0));
  }
  if (!pure_) {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) {
      throw NumericError("density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_);
    if (es.eigenvalues().minCoeff() < -tol) {
      throw NumericError("density matrix is not positive semidefinite");
    }
  }
}

Eigen::VectorXd Frame::rates(const QuditOperators& ops) const {
  const int d = ops.dim();
  switch (kind) {
    case Kind::Lab:
      return Eigen::VectorXd::Zero(d);
    case Kind::Rotating:
      if (!(reference > 0.0) || !std::isfinite(reference)) {
        throw ValidationError("rotating frame needs a positive reference frequency");
      }
      return Eigen::VectorXd::LinSpaced(d, 0.0, static_cast<double>(d - 1)) * reference;
    case Kind::Interaction:
      return ops.energies;
  }
  throw ValidationError("unknown frame");
}

QuditState change_frame(const QuditState& state, const QuditOperators& ops, const Frame& from,
                        const Frame& to, double t) {
  const Eigen::VectorXd delta = to.rates(ops) - from.rates(ops);
  Eigen::VectorXcd phase(delta.size());
  for (Eigen::Index k = 0; k < delta.size(); ++k) phase(k) = std::polar(1.0, delta(k) * t);
  if (state.is_pure()) {
    return QuditState::pure(phase.cwiseProduct(state.amplitudes()));
  }
  return QuditState::mixed(phase.asDiagonal() * state.density() * phase.conjugate().asDiagonal());
}

double automatic_step(const QuditOperators& ops, const std::vector<DriveTone>& tones,
                      const EvolveOptions& options) {
  const Generator gen =
      build_generator(ops, Frame::interaction().rates(ops), tones, options.counter_rotating);
  return choose_step(gen, options);
}

QuditState evolve(const QuditState& state, const Sequence& seq, const QuditOperators& ops,
                  const DissipationSpec* dissipation, const EvolveOptions& options,
                  const Observer& observer) {
  const int d = ops.dim();
  if (state.dim() != d) throw ValidationError("evolve: state dimension does not match operators");
  // Chained calls hand over states carrying the drift accepted below.
  if (!(std::abs(state.weight() - 1.0) <= kNormDriftLimit)) {
    throw ValidationError("evolve: initial state must be normalized");
  }
  seq.validate(d);
  if (!(options.step_safety > 0.0) || !(options.max_dt > 0.0) || options.dt < 0.0) {
    throw ValidationError("evolve: step controls must be positive");
  }
  // Integration always runs in the interaction picture, where the bare
  // energies are carried exactly by the phasors; the requested frame only
  // sets how states enter and leave.
  const Frame internal = Frame::interaction();
  const Eigen::VectorXd frame_rates = internal.rates(ops);
  const bool convert = options.frame.kind != Frame::Kind::Interaction;
  if (convert) options.frame.rates(ops);  // validates the reference

  const bool open = dissipation != nullptr && !dissipation->empty();
  std::vector<Collapse> collapse;
  if (open) {
    dissipation->validate(d);
    collapse = build_collapse(*dissipation, d);
  }
  QuditState out = open ? state.as_density() : state;
  if (convert) out = change_frame(out, ops, options.frame, internal, options.start_time);

  double t = options.start_time;
  for (const Segment& seg : seq.segments) {
    const Generator gen =
        build_generator(ops, frame_rates, active_tones(seq, seg), options.counter_rotating);
    const double dt_target = choose_step(gen, options);
    const long n = std::max(1L, static_cast<long>(std::ceil(seg.duration / dt_target - 1e-9)));
    const double h = seg.duration / static_cast<double>(n);
    Stepper stepper(gen, collapse, t, h);
    for (long k = 0; k < n; ++k) {
      if (out.is_pure()) {
        stepper.step_pure(out.amplitudes_mut(), k);
      } else {
        stepper.step_mixed(out.density_mut(), k);
      }
      if (observer) {
        const double now = t + static_cast<double>(k + 1) * h;
        observer(now, convert ? change_frame(out, ops, internal, options.frame, now) : out);
      }
    }
    t += seg.duration;
    const double w = out.weight();
    if (!std::isfinite(w) || std::abs(w - 1.0) > kNormDriftLimit) {
      throw NumericError("evolve: norm drift " + std::to_string(w - 1.0) +
                         " exceeds 1e-6; reduce the time step");
    }
  }
  return convert ? change_frame(out, ops, internal, options.frame, t) : out;
}

}  // namespace qsense::dynamics
