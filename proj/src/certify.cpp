#include "sinkflow/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sinkflow/error.hpp"
#include "sinkflow/operators.hpp"
#include "sinkflow/spectral.hpp"

namespace sinkflow {

double epr_identity_check(const FlowTrace& trace) {
  const auto& r = trace.records;
  if (r.size() < 3) throw Error(ErrorCode::InsufficientTrace, "need at least 3 records");
  const double dt = r[1].t - r[0].t;
  for (std::size_t k = 1; k < r.size(); ++k)
    if (std::abs((r[k].t - r[k - 1].t) - dt) > 1e-9 * std::abs(dt))
      throw Error(ErrorCode::InsufficientTrace, "records are not uniformly spaced");
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    const double fd = (r[k + 1].entropy - r[k - 1].entropy) / (r[k + 1].t - r[k - 1].t);
    worst = std::max(worst, std::abs(fd + r[k].fisher) / (1.0 + std::abs(fd)));
  }
  return worst;
}

std::optional<double> lsi_ratio(const Coupling& pi, const DiscreteMeasure& nu) {
  const double h = relative_entropy(pi.col_marginal(), nu);
  if (h < kLsiEntropyFloor) return std::nullopt;
  return entropy_production(pi, nu) / (2.0 * h);
}

std::optional<double> lsi_ratio(const FlowRecord& record) {
  if (record.entropy < kLsiEntropyFloor) return std::nullopt;
  return record.fisher / (2.0 * record.entropy);
}

namespace {

DecayCertificate check_decay(const FlowTrace& trace, double lambda) {
  DecayCertificate out;
  const auto& r = trace.records;
  const double h0 = r.front().entropy;
  out.ok = true;
  out.margin = std::numeric_limits<double>::infinity();
  for (const auto& rec : r) {
    const double bound = std::exp(-2.0 * lambda * rec.t) * h0 * (1.0 + kDecaySlack);
    const double slack = bound - rec.entropy;
    out.margin = std::min(out.margin, slack);
    if (slack < 0.0) out.ok = false;
  }
  return out;
}

}  // namespace

DecayCertificate decay_certificate(const FlowTrace& trace) {
  if (trace.records.empty()) throw Error(ErrorCode::InsufficientTrace, "empty trace");
  std::optional<double> lambda;
  int undefined = 0;
  for (const auto& rec : trace.records) {
    const auto ratio = lsi_ratio(rec);
    if (!ratio) {
      ++undefined;
      continue;
    }
    lambda = lambda ? std::min(*lambda, *ratio) : *ratio;
  }
  DecayCertificate out = check_decay(trace, lambda.value_or(0.0));
  out.lambda_hat = lambda;
  out.undefined = undefined;
  return out;
}

DecayCertificate decay_certificate(const FlowTrace& trace, double lambda) {
  if (trace.records.empty()) throw Error(ErrorCode::InsufficientTrace, "empty trace");
  DecayCertificate out = check_decay(trace, lambda);
  out.lambda_hat = lambda;
  return out;
}

std::string_view to_string(Metric metric) {
  return metric == Metric::inv_pi_sq ? "inv_pi_sq" : "fisher_rao";
}

std::optional<double> ContractionResult::worst_margin() const {
  std::optional<double> worst;
  for (const auto& s : steps) {
    if (!s.observed_rate) continue;
    const double m = *s.observed_rate - s.predicted_rate;
    worst = worst ? std::min(*worst, m) : m;
  }
  return worst;
}

double ContractionResult::norm_mismatch() const {
  double worst = 0.0;
  for (const auto& s : steps) {
    const double scale = std::max(s.norm_sq, std::numeric_limits<double>::min());
    worst = std::max(worst, std::abs(s.norm_sq - s.norm_sq_alt) / scale);
  }
  return worst;
}

namespace {

// Joint state of the flow and a dual perturbation u on X x Y.
struct TangentState {
  std::vector<double> h;
  Matrix u;
};

// (I - Q) u at pi.
Matrix project_ker_q(const Coupling& pi, const Matrix& u) {
  const auto q = conditional_mean_given_x(pi, u);
  Matrix out = u;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (double& v : out.row(i)) v -= q[i];
  return out;
}

class TangentIntegrator {
 public:
  TangentIntegrator(const Problem& problem, double gamma)
      : problem_(problem), base_(gibbs_init(problem)), gamma_(gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::BadArguments, "gamma must be positive");
  }

  const Coupling& base() const { return base_; }

  Coupling primal(const std::vector<double>& h) const {
    return mirror_primal(h, base_, problem_.mu);
  }

  // Returns (dh/dt, du/dt); du/dt = -P xi is a function of y, lifted.
  std::pair<std::vector<double>, Matrix> rhs(const TangentState& s) const {
    const Coupling pi = primal(s.h);
    auto dh = log_ratio(pi.col_marginal().masses(), problem_.nu.masses());
    for (double& v : dh) v = -v;
    const Matrix xi = project_ker_q(pi, s.u);
    auto pxi = conditional_mean_given_y(pi, xi);
    for (double& v : pxi) v = -v;
    return {std::move(dh), lift_y(pxi, pi.rows())};
  }

  void step(TangentState& s) const {
    auto axpy = [](const TangentState& a, double c, const std::pair<std::vector<double>, Matrix>& k) {
      TangentState out = a;
      for (std::size_t j = 0; j < out.h.size(); ++j) out.h[j] += c * k.first[j];
      for (std::size_t q = 0; q < out.u.size(); ++q) out.u.data()[q] += c * k.second.data()[q];
      return out;
    };
    const auto k1 = rhs(s);
    const auto k2 = rhs(axpy(s, 0.5 * gamma_, k1));
    const auto k3 = rhs(axpy(s, 0.5 * gamma_, k2));
    const auto k4 = rhs(axpy(s, gamma_, k3));
    for (std::size_t j = 0; j < s.h.size(); ++j)
      s.h[j] += gamma_ / 6.0 * (k1.first[j] + 2.0 * k2.first[j] + 2.0 * k3.first[j] + k4.first[j]);
    for (std::size_t q = 0; q < s.u.size(); ++q)
      s.u.data()[q] += gamma_ / 6.0 *
                       (k1.second.data()[q] + 2.0 * k2.second.data()[q] +
                        2.0 * k3.second.data()[q] + k4.second.data()[q]);
    for (double v : s.h)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "non-finite potential");
    // Shifts of h by constants and of u by functions of x leave pi and delta_pi unchanged.
    const Coupling pi = primal(s.h);
    double mean = 0.0;
    for (std::size_t j = 0; j < s.h.size(); ++j) mean += pi.col_marginal()[j] * s.h[j];
    for (double& v : s.h) v -= mean;
    s.u = project_ker_q(pi, s.u);
  }

 private:
  const Problem& problem_;
  Coupling base_;
  double gamma_;
};

TangentState initial_tangent(const TangentIntegrator& integrator, const Problem& problem,
                             const Perturbation& delta) {
  if (delta.rows() != problem.n() || delta.cols() != problem.m())
    throw Error(ErrorCode::ShapeMismatch, "perturbation does not match problem");
  if (!delta.is_tangent()) throw Error(ErrorCode::NotTangent, "row sums of delta must vanish");
  TangentState s;
  s.h.assign(problem.m(), 0.0);
  const Coupling pi0 = integrator.primal(s.h);
  s.u = delta.log_direction(pi0);
  return s;
}

ContractionStep measure(const Problem& problem, const TangentState& s, const Coupling& pi,
                        Metric metric, long step, double t) {
  ContractionStep out;
  out.step = step;
  out.t = t;
  const std::size_t n = pi.rows();
  const std::size_t m = pi.cols();
  const Matrix xi = project_ker_q(pi, s.u);
  Matrix dpi(n, m);
  for (std::size_t q = 0; q < dpi.size(); ++q) dpi.data()[q] = pi.table().data()[q] * xi.data()[q];

  const auto qxi = conditional_mean_given_x(pi, xi);
  for (double v : qxi) out.kerq_defect = std::max(out.kerq_defect, std::abs(v));

  // d/dt log pi = (I - Q) dh/dt, dh/dt = -log(pi^Y / nu).
  auto g = log_ratio(pi.col_marginal().masses(), problem.nu.masses());
  for (double& v : g) v = -v;
  const Matrix psi = centered_given_x(pi, g);

  // d xi/dt = -(I - Q) P xi - Q(xi psi).
  const Matrix pxi = lift_y(conditional_mean_given_y(pi, xi), n);
  Matrix xi_psi(n, m);
  for (std::size_t q = 0; q < xi.size(); ++q) xi_psi.data()[q] = xi.data()[q] * psi.data()[q];
  const auto q_xi_psi = conditional_mean_given_x(pi, xi_psi);
  const auto q_pxi = conditional_mean_given_x(pi, pxi);
  Matrix dxi(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      dxi(i, j) = -(pxi(i, j) - q_pxi[i]) - q_xi_psi[i];

  if (metric == Metric::inv_pi_sq) {
    out.norm_sq = inner(xi, xi);
    double alt = 0.0;
    for (std::size_t q = 0; q < dpi.size(); ++q) {
      const double r = dpi.data()[q] / pi.table().data()[q];
      alt += r * r;
    }
    out.norm_sq_alt = alt;
    if (out.norm_sq > 0.0) out.observed_rate = -inner(xi, dxi) / out.norm_sq;
    out.predicted_rate = rate_theorem1(pi).rate;
  } else {
    out.norm_sq = inner(xi, xi, pi);
    double alt = 0.0;
    for (std::size_t q = 0; q < dpi.size(); ++q)
      alt += dpi.data()[q] * dpi.data()[q] / pi.table().data()[q];
    out.norm_sq_alt = alt;
    Matrix xi_sq_psi(n, m);
    for (std::size_t q = 0; q < xi.size(); ++q) xi_sq_psi.data()[q] = xi.data()[q] * xi_psi.data()[q];
    const Matrix ones(n, m, 1.0);
    const double rate_of_change = inner(xi_sq_psi, ones, pi) + 2.0 * inner(xi, dxi, pi);
    if (out.norm_sq > 0.0) out.observed_rate = -rate_of_change / out.norm_sq;
    out.predicted_rate = rate_theorem2(pi, problem.nu).rate;
  }
  return out;
}

}  // namespace

ContractionResult contraction_experiment(const Problem& problem, const Perturbation& delta,
                                         Metric metric, double gamma, long n_steps,
                                         long record_every) {
  if (n_steps < 0 || record_every < 1)
    throw Error(ErrorCode::BadArguments, "invalid step counts");
  TangentIntegrator integrator(problem, gamma);
  TangentState s = initial_tangent(integrator, problem, delta);
  ContractionResult out;
  out.metric = metric;
  bool zero = true;
  for (double v : delta.table().data())
    if (v != 0.0) zero = false;
  out.defined = !zero;

  auto record = [&](long k) {
    const Coupling pi = integrator.primal(s.h);
    out.steps.push_back(measure(problem, s, pi, metric, k, static_cast<double>(k) * gamma));
  };
  record(0);
  for (long k = 1; k <= n_steps; ++k) {
    integrator.step(s);
    if (k % record_every == 0) record(k);
  }
  return out;
}

TangentSnapshot propagate_tangent(const Problem& problem, const Perturbation& delta,
                                  double gamma, long n_steps) {
  TangentIntegrator integrator(problem, gamma);
  TangentState s = initial_tangent(integrator, problem, delta);
  for (long k = 1; k <= n_steps; ++k) integrator.step(s);
  TangentSnapshot out;
  out.base = make_flow_state(static_cast<double>(n_steps) * gamma, s.h, integrator.base(),
                             problem.mu, problem.nu);
  const Matrix xi = project_ker_q(out.base.pi, s.u);
  out.delta_pi = Matrix(xi.rows(), xi.cols());
  for (std::size_t q = 0; q < xi.size(); ++q)
    out.delta_pi.data()[q] = out.base.pi.table().data()[q] * xi.data()[q];
  return out;
}

long plan_iterations(double h0, double tau, double lambda, double gamma) {
  if (!(lambda > 0.0) || !(gamma > 0.0) || !(tau > 0.0) || !(h0 > 0.0))
    throw Error(ErrorCode::BadArguments, "plan_iterations needs positive arguments");
  if (tau >= h0) return 0;
  const double x = std::log(h0 / tau) / (2.0 * lambda * gamma);
  // Exact integer ratios (e.g. H0 = tau e^{2 lambda gamma}) must not round up.
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, x)) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(x));
}

CertificateReport certify_trace(const FlowTrace& trace, double epr_tolerance) {
  CertificateReport out;
  out.epr_tolerance = epr_tolerance;
  if (trace.records.size() >= 3) out.epr_max_residual = epr_identity_check(trace);
  out.decay = decay_certificate(trace);
  finalize(out);
  return out;
}

void finalize(CertificateReport& report) {
  bool ok = report.decay.ok;
  if (report.epr_max_residual && *report.epr_max_residual > report.epr_tolerance) ok = false;
  if (report.max_poincare_c && *report.max_poincare_c > 1.0 - 1e-8) ok = false;
  if (report.contraction_margin_inv_pi_sq && *report.contraction_margin_inv_pi_sq < -1e-6)
    ok = false;
  if (report.contraction_margin_fisher_rao && *report.contraction_margin_fisher_rao < -1e-6)
    ok = false;
  report.passed = ok;
}

}  // namespace sinkflow
