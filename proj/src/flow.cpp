#include "sinkflow/flow.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "sinkflow/kernels.hpp"
#include "sinkflow/operators.hpp"

namespace sinkflow {

namespace {

Coupling checked_mirror(Matrix table) {
  for (double v : table.data())
    if (!(v >= DBL_MIN) || !std::isfinite(v))
      throw Error(ErrorCode::Overflow, "potential range too large; recentre h");
  return Coupling::validated(std::move(table));
}

void require_finite(std::span<const double> h) {
  for (double v : h)
    if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, "non-finite potential");
}

}  // namespace

Coupling mirror_primal(std::span<const double> h, const Coupling& pi0, const DiscreteMeasure& mu) {
  if (h.size() != pi0.cols() || mu.size() != pi0.rows())
    throw Error(ErrorCode::ShapeMismatch, "mirror_primal");
  require_finite(h);
  Matrix table(pi0.rows(), pi0.cols());
  kernels::parallel::mirror_rows(pi0.table(), h, mu.masses(), table);
  return checked_mirror(std::move(table));
}

Coupling mirror_primal(const Matrix& h, const Coupling& pi0, const DiscreteMeasure& mu) {
  if (!h.same_shape(pi0.table()) || mu.size() != pi0.rows())
    throw Error(ErrorCode::ShapeMismatch, "mirror_primal");
  require_finite(h.data());
  Matrix table(pi0.rows(), pi0.cols());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto hi = h.row(i);
    const double top = *std::max_element(hi.begin(), hi.end());
    double z = 0.0;
    for (std::size_t j = 0; j < table.cols(); ++j) {
      table(i, j) = pi0(i, j) * std::exp(hi[j] - top);
      z += table(i, j);
    }
    for (double& v : table.row(i)) v *= mu[i] / z;
  }
  return checked_mirror(std::move(table));
}

FlowState make_flow_state(double t, std::vector<double> h, const Coupling& pi0,
                          const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  FlowState s;
  s.t = t;
  s.pi = mirror_primal(h, pi0, mu);
  s.g = log_ratio(s.pi.col_marginal().masses(), nu.masses());
  s.h = std::move(h);
  return s;
}

std::vector<double> flow_rhs(const FlowState& state) {
  std::vector<double> out(state.g.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -state.g[j];
  return out;
}

Matrix dlog_pi_dt(const FlowState& state) { return centered_given_x(state.pi, flow_rhs(state)); }

std::string_view to_string(Method method) { return method == Method::euler ? "euler" : "rk4"; }

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::euler;
  if (name == "rk4") return Method::rk4;
  throw Error(ErrorCode::BadArguments, "unknown method '" + std::string(name) + "'");
}

FlowIntegrator::FlowIntegrator(const Problem& problem, Method method, double gamma)
    : FlowIntegrator(problem, gibbs_init(problem), method, gamma) {}

FlowIntegrator::FlowIntegrator(const Problem& problem, Coupling base, Method method,
                               double gamma)
    : problem_(problem), base_(std::move(base)), method_(method), gamma_(gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::BadArguments, "gamma must be positive");
  if (base_.rows() != problem.n() || base_.cols() != problem.m())
    throw Error(ErrorCode::ShapeMismatch, "base coupling does not match problem");
  state_ = make_flow_state(0.0, std::vector<double>(problem.m(), 0.0), base_, problem.mu,
                           problem.nu);
}

std::vector<double> FlowIntegrator::rhs_at(std::span<const double> h) const {
  const Coupling pi = mirror_primal(h, base_, problem_.mu);
  auto g = log_ratio(pi.col_marginal().masses(), problem_.nu.masses());
  for (double& v : g) v = -v;
  return g;
}

void FlowIntegrator::step() {
  const auto& h = state_.h;
  const std::size_t m = h.size();
  std::vector<double> next(m);
  const auto k1 = flow_rhs(state_);
  if (method_ == Method::euler) {
    for (std::size_t j = 0; j < m; ++j) next[j] = h[j] + gamma_ * k1[j];
  } else {
    std::vector<double> probe(m);
    for (std::size_t j = 0; j < m; ++j) probe[j] = h[j] + 0.5 * gamma_ * k1[j];
    const auto k2 = rhs_at(probe);
    for (std::size_t j = 0; j < m; ++j) probe[j] = h[j] + 0.5 * gamma_ * k2[j];
    const auto k3 = rhs_at(probe);
    for (std::size_t j = 0; j < m; ++j) probe[j] = h[j] + gamma_ * k3[j];
    const auto k4 = rhs_at(probe);
    for (std::size_t j = 0; j < m; ++j)
      next[j] = h[j] + gamma_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  for (double v : next)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "non-finite potential");

  FlowState s;
  s.pi = mirror_primal(next, base_, problem_.mu);
  double mean = 0.0;
  for (std::size_t j = 0; j < m; ++j) mean += s.pi.col_marginal()[j] * next[j];
  for (double& v : next) v -= mean;
  s.g = log_ratio(s.pi.col_marginal().masses(), problem_.nu.masses());
  s.h = std::move(next);
  ++steps_;
  s.t = static_cast<double>(steps_) * gamma_;
  state_ = std::move(s);
}

namespace {

FlowRecord make_record(const FlowState& s, long step, const Problem& problem) {
  FlowRecord r;
  r.step = step;
  r.t = s.t;
  r.entropy = relative_entropy(s.pi.col_marginal(), problem.nu);
  r.fisher = entropy_production(s.pi, problem.nu);
  r.row_marginal_err = max_abs_diff(s.pi.row_marginal().masses(), problem.mu.masses());
  return r;
}

}  // namespace

FlowTrace integrate(const Problem& problem, const FlowOptions& options, const RecordHook& hook) {
  if (options.n_steps < 0) throw Error(ErrorCode::BadArguments, "negative step count");
  if (options.record_every < 1) throw Error(ErrorCode::BadArguments, "record_every must be >= 1");
  FlowIntegrator integrator(problem, options.method, options.gamma);
  FlowTrace trace;
  trace.gamma = options.gamma;
  trace.method = options.method;
  trace.record_every = options.record_every;

  auto record = [&] {
    FlowRecord r = make_record(integrator.state(), integrator.steps_taken(), problem);
    if (hook) hook(integrator.state(), r);
    trace.records.push_back(r);
  };

  record();
  try {
    for (long k = 1; k <= options.n_steps; ++k) {
      integrator.step();
      if (k % options.record_every == 0) record();
    }
  } catch (const Error& e) {
    fill_finite_differences(trace);
    throw IntegrationAborted(e, std::move(trace));
  }
  fill_finite_differences(trace);
  return trace;
}

void fill_finite_differences(FlowTrace& trace) {
  auto& r = trace.records;
  for (std::size_t k = 0; k < r.size(); ++k) r[k].dh_fd.reset();
  for (std::size_t k = 1; k + 1 < r.size(); ++k)
    r[k].dh_fd = (r[k + 1].entropy - r[k - 1].entropy) / (r[k + 1].t - r[k - 1].t);
}

}  // namespace sinkflow
