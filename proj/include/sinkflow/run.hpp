#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sinkflow/certify.hpp"
#include "sinkflow/config.hpp"
#include "sinkflow/spectral.hpp"
#include "sinkflow/trace_io.hpp"

namespace sinkflow {

enum ExitCode : int { kExitPass = 0, kExitCertificate = 1, kExitUsage = 2, kExitNumerical = 3 };

/// Usage-type errors map to 2, everything numerical to 3.
int exit_code_for(ErrorCode code);

enum class Command { generate, sinkhorn, flow, spectral, certify };

std::string_view to_string(Command command);

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json report;
};

nlohmann::json to_json(const SpectralReport& report);
nlohmann::json to_json(const CertificateReport& report);
nlohmann::json to_json(const ContractionResult& result);

/// Certificates that depend on the trace alone, so a saved trace reproduces them.
CertificateReport certify_saved_trace(const FlowTrace& trace, const RunConfig& config);

/// Runs one pipeline stage into config.output_dir (created if needed).
/// Writes report.json and config.json plus the stage's trace CSV.
/// Inner errors propagate; a flow that leaves the finite range is written out
/// as a partial trace and reported with exit code 3.
RunResult run(const RunConfig& config, Command command);

/// certify from a trace file saved by an earlier run of the same config.
RunResult run_certify_trace(const RunConfig& config, const std::string& trace_path);

struct PlanRequest {
  std::optional<double> h0;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> tau;
};

/// Missing H0 or lambda are measured from a flow run of the config.
RunResult run_plan(const RunConfig& config, const PlanRequest& request);

}  // namespace sinkflow
