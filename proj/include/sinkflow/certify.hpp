#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "sinkflow/eot.hpp"
#include "sinkflow/flow.hpp"
#include "sinkflow/measures.hpp"

namespace sinkflow {

/// Entropies below this are treated as the target itself (LSI ratio 0/0).
inline constexpr double kLsiEntropyFloor = 1e-14;
/// Relative slack on the exponential decay bound.
inline constexpr double kDecaySlack = 1e-6;

/// Largest |dH_fd + I| / (1 + |dH_fd|) over interior records.
/// Throws InsufficientTrace for fewer than 3 records or non-uniform spacing.
double epr_identity_check(const FlowTrace& trace);

/// I_pi(pi^Y | nu) / (2 H(pi^Y | nu)); empty when H < kLsiEntropyFloor.
std::optional<double> lsi_ratio(const Coupling& pi, const DiscreteMeasure& nu);
/// Same ratio from recorded entropy and Fisher information.
std::optional<double> lsi_ratio(const FlowRecord& record);

struct DecayCertificate {
  std::optional<double> lambda_hat;  // trajectory minimum of the LSI ratio
  bool ok = false;
  double margin = 0.0;               // min over records of bound - H
  int undefined = 0;                 // records dropped from the minimum
};

/// Checks H(t_k) <= exp(-2 lambda_hat t_k) H(0) (1 + kDecaySlack) at every record.
DecayCertificate decay_certificate(const FlowTrace& trace);
/// Same check for a caller-supplied rate.
DecayCertificate decay_certificate(const FlowTrace& trace, double lambda);

enum class Metric { inv_pi_sq, fisher_rao };

std::string_view to_string(Metric metric);

/// One recorded state of a perturbation co-integrated with the flow.
///
/// With xi = delta_pi / pi (which lies in ker Q), the inv_pi_sq norm is ||xi||^2
/// and the fisher_rao norm is <xi, xi>_pi. Observed rates follow the two
/// contraction statements: -(d/dt 1/2 ||xi||^2) / ||xi||^2 for inv_pi_sq and
/// -(d/dt <xi, xi>_pi) / <xi, xi>_pi for fisher_rao.
struct ContractionStep {
  long step = 0;
  double t = 0.0;
  double norm_sq = 0.0;      // from xi directly
  double norm_sq_alt = 0.0;  // from delta_pi entrywise
  std::optional<double> observed_rate;
  double predicted_rate = 0.0;
  double kerq_defect = 0.0;  // max_x |(Q xi)(x)|
};

struct ContractionResult {
  Metric metric = Metric::inv_pi_sq;
  bool defined = true;  // false when the perturbation is zero
  std::vector<ContractionStep> steps;

  /// min over steps of observed - predicted.
  std::optional<double> worst_margin() const;
  /// max over steps of |norm_sq - norm_sq_alt| / max(norm_sq, tiny).
  double norm_mismatch() const;
};

/// Co-integrates the flow with rk4 together with the exact linearization of a
/// tangent perturbation delta (row sums zero). The dual direction u obeys
/// du/dt = -P (delta_pi / pi) with delta_pi = pi (I - Q) u. Throws NotTangent.
ContractionResult contraction_experiment(const Problem& problem, const Perturbation& delta,
                                         Metric metric, double gamma, long n_steps,
                                         long record_every = 1);

/// Tangent state at the end of a co-integration, for finite-difference oracles.
struct TangentSnapshot {
  FlowState base;
  Matrix delta_pi;
};

TangentSnapshot propagate_tangent(const Problem& problem, const Perturbation& delta,
                                  double gamma, long n_steps);

/// ceil(log(H0 / tau) / (2 lambda gamma)); 0 when tau >= H0.
/// Throws BadArguments when lambda, gamma or tau is not positive.
long plan_iterations(double h0, double tau, double lambda, double gamma);

struct CertificateReport {
  std::optional<double> epr_max_residual;
  double epr_tolerance = 1e-4;
  DecayCertificate decay;
  std::optional<double> max_poincare_c;
  std::optional<double> contraction_margin_inv_pi_sq;
  std::optional<double> contraction_margin_fisher_rao;
  std::optional<long> plan;
  bool passed = false;
};

/// Trace-only certificates (EPR identity, decay); spectral and contraction
/// fields are filled by the caller.
CertificateReport certify_trace(const FlowTrace& trace, double epr_tolerance);

/// Recomputes the pass flag from the filled fields.
void finalize(CertificateReport& report);

}  // namespace sinkflow
