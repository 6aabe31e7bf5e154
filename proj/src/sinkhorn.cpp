#include "sinkflow/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sinkflow/error.hpp"
#include "sinkflow/kernels.hpp"

namespace sinkflow {

std::string_view to_string(SinkhornMode mode) {
  return mode == SinkhornMode::direct ? "direct" : "log_domain";
}

SinkhornMode parse_sinkhorn_mode(std::string_view name) {
  if (name == "direct") return SinkhornMode::direct;
  if (name == "log_domain") return SinkhornMode::log_domain;
  throw Error(ErrorCode::BadArguments, "unknown sinkhorn mode '" + std::string(name) + "'");
}

Coupling project_row(const Coupling& pi, const DiscreteMeasure& mu) {
  if (pi.rows() != mu.size()) throw Error(ErrorCode::ShapeMismatch, "project_row");
  Matrix table = pi.table();
  std::vector<double> factors(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) factors[i] = mu[i] / pi.row_marginal()[i];
  kernels::parallel::scale_rows(table, factors);
  return Coupling::validated(std::move(table));
}

Coupling project_col(const Coupling& pi, const DiscreteMeasure& nu) {
  if (pi.cols() != nu.size()) throw Error(ErrorCode::ShapeMismatch, "project_col");
  Matrix table = pi.table();
  std::vector<double> factors(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) factors[j] = nu[j] / pi.col_marginal()[j];
  kernels::parallel::scale_cols(table, factors);
  return Coupling::validated(std::move(table));
}

namespace {

// Iteration state shared by both modes: the current coupling plus accumulated
// log-scalings a, b with pi = exp(a_i + logK_ij + b_j), logK the unnormalized
// Gibbs log-kernel.
class Iterate {
 public:
  Iterate(const Problem& problem, SinkhornMode mode)
      : problem_(problem), mode_(mode), log_kernel_(gibbs_log_kernel(problem)) {
    a_.assign(problem.n(), 0.0);
    b_.assign(problem.m(), 0.0);
    double top = -std::numeric_limits<double>::infinity();
    for (double v : log_kernel_.data()) top = std::max(top, v);
    double z = 0.0;
    for (double v : log_kernel_.data()) z += std::exp(v - top);
    const double log_z = top + std::log(z);
    if (mode_ == SinkhornMode::direct) {
      pi_ = gibbs_init(problem);
      u_.assign(problem.n(), std::exp(-log_z));
      v_.assign(problem.m(), 1.0);
      if (!std::isfinite(u_[0]))
        throw Error(ErrorCode::Underflow, "Gibbs normalizer out of range; use log_domain");
    } else {
      for (double& a : a_) a = -log_z;
      pi_ = materialize();
    }
  }

  const Coupling& coupling() const { return pi_; }

  void row_step() {
    if (mode_ == SinkhornMode::direct) {
      std::vector<double> factors(problem_.n());
      for (std::size_t i = 0; i < factors.size(); ++i) {
        factors[i] = problem_.mu[i] / pi_.row_marginal()[i];
        u_[i] *= factors[i];
      }
      Matrix table = pi_.table();
      kernels::parallel::scale_rows(table, factors);
      pi_ = checked(std::move(table));
    } else {
      std::vector<double> lse(problem_.n());
      kernels::parallel::logsumexp_rows(log_kernel_, b_, lse);
      for (std::size_t i = 0; i < a_.size(); ++i) a_[i] = std::log(problem_.mu[i]) - lse[i];
      pi_ = materialize();
    }
  }

  void col_step() {
    if (mode_ == SinkhornMode::direct) {
      std::vector<double> factors(problem_.m());
      for (std::size_t j = 0; j < factors.size(); ++j) {
        factors[j] = problem_.nu[j] / pi_.col_marginal()[j];
        v_[j] *= factors[j];
      }
      Matrix table = pi_.table();
      kernels::parallel::scale_cols(table, factors);
      pi_ = checked(std::move(table));
    } else {
      std::vector<double> lse(problem_.m());
      kernels::parallel::logsumexp_cols(log_kernel_, a_, lse);
      for (std::size_t j = 0; j < b_.size(); ++j) b_[j] = std::log(problem_.nu[j]) - lse[j];
      pi_ = materialize();
    }
  }

  Potentials potentials() const {
    if (mode_ == SinkhornMode::direct) return potentials_from_scalings(u_, v_, problem_.epsilon);
    Potentials out{a_, b_};
    for (double& f : out.f) f *= problem_.epsilon;
    for (double& g : out.g) g *= problem_.epsilon;
    return out;
  }

 private:
  Coupling materialize() const {
    Matrix table(problem_.n(), problem_.m());
    for (std::size_t i = 0; i < table.rows(); ++i)
      for (std::size_t j = 0; j < table.cols(); ++j)
        table(i, j) = std::exp(a_[i] + log_kernel_(i, j) + b_[j]);
    return checked(std::move(table));
  }

  Coupling checked(Matrix table) const {
    try {
      return Coupling::validated(std::move(table));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ZeroMass) throw Error(ErrorCode::Underflow, e.what());
      throw;
    }
  }

  const Problem& problem_;
  SinkhornMode mode_;
  Matrix log_kernel_;
  Coupling pi_;
  std::vector<double> a_, b_;  // log-domain scalings
  std::vector<double> u_, v_;  // direct-mode scalings
};

double marginal_error(const Coupling& pi, const Problem& problem) {
  return relative_entropy(pi.row_marginal(), problem.mu) +
         relative_entropy(pi.col_marginal(), problem.nu);
}

double max_marginal_deviation(const Coupling& pi, const Problem& problem) {
  return std::max(max_abs_diff(pi.row_marginal().masses(), problem.mu.masses()),
                  max_abs_diff(pi.col_marginal().masses(), problem.nu.masses()));
}

// High-precision minimizer used as the reference for H(pi_* | pi_t): converge
// to 1e-14, then keep sweeping while the marginal defect still shrinks.
Coupling reference_solution(const Problem& problem, const SinkhornOptions& options) {
  SinkhornOptions inner = options;
  inner.tol = 1e-14;
  inner.track_reference = false;
  Iterate it(problem, options.mode);
  int sweeps = 0;
  while (marginal_error(it.coupling(), problem) > inner.tol) {
    if (++sweeps > inner.max_sweeps)
      throw Error(ErrorCode::MaxIterations, "reference solve did not converge");
    it.row_step();
    it.col_step();
  }
  double best = max_marginal_deviation(it.coupling(), problem);
  Coupling best_pi = it.coupling();
  int stalled = 0;
  for (int k = 0; k < 10000 && stalled < 20 && best > 1e-16; ++k) {
    it.row_step();
    it.col_step();
    const double dev = max_marginal_deviation(it.coupling(), problem);
    if (dev < best) {
      best = dev;
      best_pi = it.coupling();
      stalled = 0;
    } else {
      ++stalled;
    }
  }
  return best_pi;
}

}  // namespace

SinkhornResult sinkhorn_solve(const Problem& problem, const SinkhornOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::BadArguments, "tol must be positive");

  std::optional<Coupling> reference;
  if (options.track_reference) reference = reference_solution(problem, options);

  Iterate it(problem, options.mode);
  SinkhornResult result;
  auto record = [&](int step, int sweep, HalfStep kind, const Coupling* previous) {
    const Coupling& pi = it.coupling();
    SinkhornRecord r;
    r.step = step;
    r.sweep = sweep;
    r.kind = kind;
    r.h_row = relative_entropy(pi.row_marginal(), problem.mu);
    r.h_col = relative_entropy(pi.col_marginal(), problem.nu);
    if (reference) r.h_ref = relative_entropy(*reference, pi);
    if (previous) r.h_step = relative_entropy(pi, *previous);
    result.trace.records.push_back(r);
    return r.h_row + r.h_col;
  };

  int step = 0;
  int sweep = 0;
  double err = record(step, sweep, HalfStep::init, nullptr);
  while (err > options.tol) {
    if (sweep >= options.max_sweeps)
      throw Error(ErrorCode::MaxIterations,
                  "tolerance not reached after " + std::to_string(sweep) + " sweeps");
    Coupling previous = it.coupling();
    it.row_step();
    record(++step, sweep, HalfStep::row, &previous);
    previous = it.coupling();
    it.col_step();
    ++sweep;
    err = record(++step, sweep, HalfStep::col, &previous);
  }
  result.coupling = it.coupling();
  result.potentials = it.potentials();
  result.sweeps = sweep;
  return result;
}

}  // namespace sinkflow
