#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sinkflow/eot.hpp"
#include "sinkflow/error.hpp"
#include "sinkflow/matrix.hpp"
#include "sinkflow/measures.hpp"

namespace sinkflow {

/// Primal image of a target-side dual potential h:
///   pi(x, y) = mu(x) pi0(x, y) exp(h(y)) / Z(x),  Z(x) = sum_y' pi0(x, y') exp(h(y')).
/// Row marginal is mu by construction. Throws Overflow if h is non-finite or its
/// range is so large that a cell vanishes.
Coupling mirror_primal(std::span<const double> h, const Coupling& pi0, const DiscreteMeasure& mu);
/// Same map for a potential on X x Y; x-only components cancel in Z(x).
Coupling mirror_primal(const Matrix& h, const Coupling& pi0, const DiscreteMeasure& mu);

struct FlowState {
  double t = 0.0;
  std::vector<double> h;  // dual potential on the target grid
  Coupling pi;            // mirror_primal(h)
  std::vector<double> g;  // log(pi^Y / nu)
};

FlowState make_flow_state(double t, std::vector<double> h, const Coupling& pi0,
                          const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// dh/dt = -log(pi^Y / nu).
std::vector<double> flow_rhs(const FlowState& state);

/// d/dt log pi_t = (I - Q) dh/dt lifted to X x Y.
Matrix dlog_pi_dt(const FlowState& state);

enum class Method { euler, rk4 };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Owns one trajectory of the continuous-time flow, started from h = 0.
class FlowIntegrator {
 public:
  /// Starts from the Gibbs coupling of `problem`.
  FlowIntegrator(const Problem& problem, Method method, double gamma);
  /// Starts from an arbitrary positive base coupling.
  FlowIntegrator(const Problem& problem, Coupling base, Method method, double gamma);

  const FlowState& state() const noexcept { return state_; }
  const Coupling& base() const noexcept { return base_; }
  const Problem& problem() const noexcept { return problem_; }
  long steps_taken() const noexcept { return steps_; }
  double gamma() const noexcept { return gamma_; }

  /// Advances by one step of size gamma and recentres h on its pi^Y mean.
  /// Throws NonFiniteState or Overflow; the state is unchanged on failure.
  void step();

  /// Right-hand side evaluated at an arbitrary potential (used by tangent solvers).
  std::vector<double> rhs_at(std::span<const double> h) const;

 private:
  const Problem& problem_;
  Coupling base_;
  Method method_;
  double gamma_;
  FlowState state_;
  long steps_ = 0;
};

struct FlowOptions {
  double gamma = 1e-2;
  long n_steps = 1000;
  Method method = Method::rk4;
  long record_every = 10;
};

struct FlowRecord {
  long step = 0;
  double t = 0.0;
  double entropy = 0.0;  // H(pi_t^Y | nu)
  double fisher = 0.0;   // I_{pi_t}(pi_t^Y | nu)
  std::optional<double> dh_fd;
  std::optional<double> poincare_c;
  std::optional<double> lsi_ratio;
  std::optional<double> rate1;
  std::optional<double> rate2;
  double row_marginal_err = 0.0;
};

struct FlowTrace {
  double gamma = 0.0;
  Method method = Method::rk4;
  long record_every = 1;
  std::vector<FlowRecord> records;
};

/// Called once per recorded state, before the record is stored.
using RecordHook = std::function<void(const FlowState&, FlowRecord&)>;

/// Raised when the trajectory leaves the finite range; carries the trace so far.
class IntegrationAborted : public Error {
 public:
  IntegrationAborted(const Error& cause, FlowTrace partial)
      : Error(ErrorCode::NonFiniteState, cause.what()), partial_(std::move(partial)) {}
  const FlowTrace& partial() const noexcept { return partial_; }

 private:
  FlowTrace partial_;
};

/// Integrates from the Gibbs coupling with h = 0, recording every
/// `record_every` steps (including step 0).
FlowTrace integrate(const Problem& problem, const FlowOptions& options,
                    const RecordHook& hook = {});

/// Central differences of H over adjacent records (interior records only).
void fill_finite_differences(FlowTrace& trace);

}  // namespace sinkflow
