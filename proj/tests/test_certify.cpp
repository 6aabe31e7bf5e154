#include <doctest.h>

#include <cmath>

#include "sinkflow/certify.hpp"
#include "sinkflow/error.hpp"
#include "sinkflow/flow.hpp"
#include "support.hpp"

using namespace sinkflow;

namespace {

FlowTrace run_flow(const Problem& p, Method method, double gamma, long steps) {
  FlowTrace trace = integrate(p, {.gamma = gamma, .n_steps = steps, .method = method, .record_every = 1});
  fill_finite_differences(trace);
  return trace;
}

Coupling tilted(const Coupling& pi, const Matrix& u, double s, const DiscreteMeasure& mu) {
  Matrix a(pi.rows(), pi.cols());
  for (std::size_t x = 0; x < pi.rows(); ++x) {
    double z = 0.0;
    for (std::size_t y = 0; y < pi.cols(); ++y) z += (a(x, y) = pi(x, y) * std::exp(s * u(x, y)));
    for (std::size_t y = 0; y < pi.cols(); ++y) a(x, y) *= mu[x] / z;
  }
  return Coupling::validated(std::move(a));
}

}  // namespace

TEST_CASE("entropy production identity") {
  SUBCASE("stationary trajectory has zero residual") {
    const auto p = testing::product_family({0.0, 0.0, 0.0}, 2);
    CHECK(epr_identity_check(run_flow(p, Method::rk4, 1e-2, 10)) == 0.0);
  }
  SUBCASE("rk4 residual is second order in the step") {
    CounterRng rng(91);
    const double gamma = 1e-3;
    const auto p = testing::random_problem(rng, 6, 6, 0.5);
    const auto trace = run_flow(p, Method::rk4, gamma, 200);
    double worst = 0.0;
    for (const auto& r : trace.records)
      if (r.dh_fd) worst = std::max(worst, std::abs(*r.dh_fd + r.fisher) / (5.0 * gamma * gamma * (1.0 + std::abs(*r.dh_fd))));
    CHECK(worst <= 1.0);
    CHECK(epr_identity_check(trace) <= 1e-4);
  }
  SUBCASE("euler residual is first order in the step") {
    CounterRng rng(93);
    const auto p = testing::random_problem(rng, 4, 5, 0.5);
    const double r1 = epr_identity_check(run_flow(p, Method::euler, 4e-3, 50));
    const double r2 = epr_identity_check(run_flow(p, Method::euler, 2e-3, 100));
    const double slope = std::log2(r1 / r2);
    CHECK(slope > 0.8);
    CHECK(slope < 1.2);
  }
  SUBCASE("short or irregular traces are rejected") {
    const auto p = testing::product_family({0.0, 1.0}, 2);
    CHECK_THROWS_AS(epr_identity_check(run_flow(p, Method::rk4, 1e-2, 1)), Error);
    auto trace = run_flow(p, Method::rk4, 1e-2, 5);
    trace.records[2].t += 1e-3;
    CHECK_THROWS_AS(epr_identity_check(trace), Error);
  }
}

TEST_CASE("LSI ratio") {
  const auto nu = DiscreteMeasure::uniform(2);
  const auto mu = DiscreteMeasure::uniform(2);
  CHECK_FALSE(lsi_ratio(product_coupling(mu, nu), nu).has_value());
  const auto rho = DiscreteMeasure::validated({0.6, 0.4});
  const auto r = lsi_ratio(product_coupling(mu, rho), nu);
  REQUIRE(r);
  // Product couplings: I = sum_y rho (log rho/nu)^2 - H^2 over 2H.
  const double h = 0.6 * std::log(1.2) + 0.4 * std::log(0.8);
  const double s = 0.6 * std::pow(std::log(1.2), 2) + 0.4 * std::pow(std::log(0.8), 2);
  CHECK(*r == doctest::Approx((s - h * h) / (2.0 * h)).epsilon(1e-12));
  CHECK(*r == doctest::Approx(0.9797).epsilon(1e-4));
}

TEST_CASE("exponential decay certificate") {
  SUBCASE("zero rate is trivially satisfied") {
    CounterRng rng(95);
    const auto trace = run_flow(testing::random_problem(rng, 3, 4, 0.5), Method::rk4, 1e-2, 100);
    const auto d = decay_certificate(trace, 0.0);
    CHECK(d.ok);
    CHECK(d.margin >= 0.0);
  }
  SUBCASE("product family decays at the observed rate") {
    const auto p = testing::product_family({0.0, std::log(1.5)}, 2);
    const auto trace = run_flow(p, Method::rk4, 1e-2, 500);
    CHECK(trace.records.front().entropy > 0.0);
    const auto d = decay_certificate(trace);
    REQUIRE(d.lambda_hat);
    CHECK(*d.lambda_hat > 0.0);
    CHECK(d.ok);
    CHECK(d.margin >= 0.0);
    const auto doubled = decay_certificate(trace, 2.0 * *d.lambda_hat);
    CHECK_FALSE(doubled.ok);
    CHECK(doubled.margin < 0.0);
  }
  SUBCASE("records at the target are excluded from the minimum") {
    const auto p = testing::product_family({0.0, 0.0}, 2);
    const auto d = decay_certificate(run_flow(p, Method::rk4, 1e-2, 4));
    CHECK(d.undefined == 5);
    CHECK(d.ok);
  }
}

TEST_CASE("contraction of perturbations along the flow") {
  CounterRng rng(97);
  for (int k = 0; k < 5; ++k) {
    const auto p = testing::random_problem(rng, 3, 3, 0.5);
    const auto delta = testing::random_tangent(rng, 3, 3, 1e-3);
    for (Metric metric : {Metric::inv_pi_sq, Metric::fisher_rao}) {
      const auto res = contraction_experiment(p, delta, metric, 1e-2, 200);
      CHECK(res.defined);
      CHECK(res.metric == metric);
      CHECK(res.steps.size() == 201);
      const auto margin = res.worst_margin();
      REQUIRE(margin);
      CHECK(*margin >= -1e-6);
      CHECK(res.norm_mismatch() <= 1e-12);
      for (const auto& s : res.steps) CHECK(s.kerq_defect <= 1e-10);
    }
  }
  SUBCASE("zero perturbation is flagged") {
    const auto p = testing::random_problem(rng, 2, 3, 1.0);
    const auto res = contraction_experiment(p, Perturbation::validated(Matrix(2, 3)),
                                            Metric::inv_pi_sq, 1e-2, 10);
    CHECK_FALSE(res.defined);
    CHECK_FALSE(res.worst_margin().has_value());
  }
  SUBCASE("non-tangent perturbation is rejected") {
    const auto p = testing::random_problem(rng, 2, 2, 1.0);
    const auto bad = Perturbation::validated(Matrix::from_rows({{1.0, 1.0}, {-1.0, -1.0}}));
    CHECK_THROWS_AS(contraction_experiment(p, bad, Metric::fisher_rao, 1e-2, 10), Error);
  }
}

TEST_CASE("tangent propagation matches two perturbed trajectories") {
  CounterRng rng(99);
  for (int k = 0; k < 4; ++k) {
    const auto p = testing::random_problem(rng, 3, 4, 0.5);
    const auto delta = testing::random_tangent(rng, 3, 4, 1.0);
    const double gamma = 1e-2;
    const long steps = k == 0 ? 0 : 100;
    const auto snap = propagate_tangent(p, delta, gamma, steps);

    const Coupling pi0 = mirror_primal(std::vector<double>(4, 0.0), gibbs_init(p), p.mu);
    const Matrix u0 = delta.log_direction(pi0);
    const double s = 1e-4;
    FlowIntegrator plus(p, tilted(pi0, u0, s, p.mu), Method::rk4, gamma);
    FlowIntegrator minus(p, tilted(pi0, u0, -s, p.mu), Method::rk4, gamma);
    for (long i = 0; i < steps; ++i) {
      plus.step();
      minus.step();
    }
    double scale = 0.0, err = 0.0;
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 4; ++y) {
        const double fd = (plus.state().pi(x, y) - minus.state().pi(x, y)) / (2.0 * s);
        scale = std::max(scale, std::abs(snap.delta_pi(x, y)));
        err = std::max(err, std::abs(fd - snap.delta_pi(x, y)));
      }
    CHECK(scale > 0.0);
    CHECK(err <= 1e-6 * scale);
  }
}

TEST_CASE("iteration planner") {
  CHECK(plan_iterations(1.0, 1e-6, 0.5, 1.0) == 14);
  CHECK(plan_iterations(std::exp(1.0), 1.0, 0.5, 1.0) == 1);
  CHECK(plan_iterations(0.1, 0.2, 0.5, 1.0) == 0);
  CHECK_THROWS_AS(plan_iterations(1.0, 1e-6, 0.0, 1.0), Error);
  CHECK_THROWS_AS(plan_iterations(1.0, 1e-6, 0.5, -1.0), Error);
  CHECK_THROWS_AS(plan_iterations(1.0, 0.0, 0.5, 1.0), Error);

  CounterRng rng(101);
  for (int k = 0; k < 200; ++k) {
    const double h0 = rng.uniform(0.1, 2.0), tau = rng.uniform(1e-8, 1e-2);
    const double lambda = rng.uniform(0.05, 1.0), gamma = rng.uniform(1e-3, 1.0);
    const long n = plan_iterations(h0, tau, lambda, gamma);
    CHECK(n >= 1);
    CHECK(std::exp(-2.0 * lambda * gamma * n) * h0 <= tau * (1.0 + 1e-12));
    CHECK(plan_iterations(h0, tau / 2.0, lambda, gamma) >= n);
    CHECK(plan_iterations(h0, tau, 2.0 * lambda, gamma) <= n);
    CHECK(plan_iterations(h0, tau, lambda, 2.0 * gamma) <= n);
  }
}

TEST_CASE("replanning with a measured rate on a 2x2 flow") {
  const auto p = testing::product_family({0.0, std::log(1.5)}, 2);
  const double gamma = 1e-2, tau = 1e-6;
  const auto probe = run_flow(p, Method::rk4, gamma, 50);
  const auto d = decay_certificate(probe);
  REQUIRE(d.lambda_hat);
  const long planned = plan_iterations(probe.records.front().entropy, tau, *d.lambda_hat, gamma);

  FlowIntegrator flow(p, Method::rk4, gamma);
  long used = 0;
  double h = relative_entropy(flow.state().pi.col_marginal(), p.nu);
  while (h > tau) {
    // Integrate the remaining plan from the current entropy, then re-measure.
    const long chunk = std::max(1L, plan_iterations(h, tau, *d.lambda_hat, gamma));
    for (long k = 0; k < chunk; ++k) flow.step();
    used += chunk;
    h = relative_entropy(flow.state().pi.col_marginal(), p.nu);
  }
  MESSAGE("planned " << planned << " iterations, used " << used);
  CHECK(used >= 1);
}
