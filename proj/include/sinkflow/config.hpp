#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sinkflow/flow.hpp"
#include "sinkflow/generate.hpp"
#include "sinkflow/sinkhorn.hpp"

namespace sinkflow {

struct CertificateToggles {
  bool spectral = true;      // C_pi, rates and LSI ratio on every record
  bool contraction = false;  // perturbation experiments in both metrics
  double epr_tolerance = 1e-4;
  double plan_tau = 1e-6;
  double perturbation_scale = 1e-6;
};

struct RunConfig {
  GeneratorSpec generator;
  double epsilon = 0.5;
  FlowOptions flow{.gamma = 1e-2, .n_steps = 1000, .method = Method::rk4, .record_every = 1};
  long checkpoint_every = 0;  // 0 disables FlowState checkpoints
  SinkhornOptions solver{.tol = 1e-10, .max_sweeps = 100000,
                         .mode = SinkhornMode::log_domain, .track_reference = false};
  CertificateToggles certificates;
  std::string output_dir = "run";
};

/// Missing keys keep their defaults; wrong types throw BadArguments.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
/// Canonical form: sorted keys, output_dir omitted.
nlohmann::json to_json(const RunConfig& config);

/// Throws BadArguments or SizeLimit.
void validate(const RunConfig& config);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace sinkflow
