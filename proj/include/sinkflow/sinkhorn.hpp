#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "sinkflow/eot.hpp"
#include "sinkflow/measures.hpp"

namespace sinkflow {

enum class SinkhornMode { direct, log_domain };

std::string_view to_string(SinkhornMode mode);
SinkhornMode parse_sinkhorn_mode(std::string_view name);

struct SinkhornOptions {
  double tol = 1e-10;
  int max_sweeps = 100000;
  SinkhornMode mode = SinkhornMode::direct;
  /// Solve once more to high precision first so H(pi_* | pi_t) can be traced.
  bool track_reference = false;
};

enum class HalfStep { init, row, col };

/// One trace row per half-step; `step` counts half-steps (odd = row projection,
/// even = column projection) and `sweep` counts completed row+column pairs.
struct SinkhornRecord {
  int step = 0;
  int sweep = 0;
  HalfStep kind = HalfStep::init;
  double h_row = 0.0;  // H(pi_t^X | mu)
  double h_col = 0.0;  // H(pi_t^Y | nu)
  std::optional<double> h_ref;   // H(pi_* | pi_t)
  std::optional<double> h_step;  // H(pi_t | pi_{t-1})
};

struct SinkhornTrace {
  std::vector<SinkhornRecord> records;
};

struct SinkhornResult {
  Coupling coupling;
  Potentials potentials;
  SinkhornTrace trace;
  int sweeps = 0;
};

/// Closest element of Pi(mu, .) in relative entropy: rescale each row to mu.
Coupling project_row(const Coupling& pi, const DiscreteMeasure& mu);
/// Closest element of Pi(., nu): rescale each column to nu.
Coupling project_col(const Coupling& pi, const DiscreteMeasure& nu);

/// Alternating projections from the Gibbs coupling until
/// H(pi^X | mu) + H(pi^Y | nu) <= tol, checked after every sweep.
/// Throws MaxIterations, or Underflow in direct mode.
SinkhornResult sinkhorn_solve(const Problem& problem, const SinkhornOptions& options = {});

}  // namespace sinkflow
