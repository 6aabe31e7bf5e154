#include "sinkflow/run.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "sinkflow/error.hpp"
#include "sinkflow/operators.hpp"
#include "sinkflow/rng.hpp"

namespace sinkflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPerturbationStream = 3;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

RunHeader header_of(const RunConfig& config) {
  return RunHeader{config_hash(config), config.generator.seed};
}

json base_report(const RunConfig& config, std::string_view command) {
  return json{{"config_hash", config_hash(config)},
              {"seed", config.generator.seed},
              {"command", std::string(command)},
              {"partial", false}};
}

void write_outputs(const RunConfig& config, const json& report) {
  json echo{{"config_hash", config_hash(config)},
            {"seed", config.generator.seed},
            {"config", to_json(config)}};
  write_file(join(config.output_dir, "config.json"), echo.dump(2) + "\n");
  write_file(join(config.output_dir, "report.json"), report.dump(2) + "\n");
}

json problem_json(const Problem& p, const RunConfig& config) {
  return json{{"family", config.generator.family},
              {"n", p.n()},
              {"m", p.m()},
              {"epsilon", p.epsilon}};
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Perturbation random_tangent(const Problem& p, const RunConfig& config) {
  CounterRng rng(CounterRng::mix(config.generator.seed ^ CounterRng::mix(kPerturbationStream)));
  Matrix d(p.n(), p.m());
  for (std::size_t i = 0; i < p.n(); ++i) {
    double mean = 0.0;
    for (double& v : d.row(i)) {
      v = rng.uniform(-1.0, 1.0);
      mean += v;
    }
    mean /= static_cast<double>(p.m());
    for (double& v : d.row(i)) v = config.certificates.perturbation_scale * (v - mean);
  }
  return Perturbation::validated(std::move(d));
}

void write_checkpoint(const RunConfig& config, const FlowState& s, long step) {
  json j{{"step", step}, {"t", s.t}, {"h", s.h}, {"pi", matrix_json(s.pi.table())}};
  const std::string name = "checkpoint_" + std::to_string(step) + ".json";
  write_file((fs::path(config.output_dir) / name).string(), j.dump(2) + "\n");
}

// Flow with per-record spectral columns and checkpoints.
FlowTrace run_flow(const Problem& problem, const RunConfig& config, bool spectral,
                   json& report, bool& partial) {
  RecordHook hook = [&](const FlowState& s, FlowRecord& r) {
    r.lsi_ratio = lsi_ratio(r);
    if (spectral) {
      const auto sr = spectral_report(s.pi, problem.nu, true);
      r.poincare_c = sr.poincare_c;
      r.rate1 = sr.rate1;
      r.rate2 = sr.rate2;
    }
    if (config.checkpoint_every > 0 && r.step % config.checkpoint_every == 0)
      write_checkpoint(config, s, r.step);
  };
  partial = false;
  FlowTrace trace;
  try {
    trace = integrate(problem, config.flow, hook);
  } catch (const IntegrationAborted& e) {
    trace = e.partial();
    partial = true;
    report["error"] = e.what();
  }
  std::ostringstream csv;
  write_flow_trace(csv, header_of(config), trace);
  write_file(join(config.output_dir, "trace.csv"), csv.str());

  const auto& last = trace.records.back();
  report["flow"] = json{{"gamma", config.flow.gamma},
                        {"method", std::string(to_string(config.flow.method))},
                        {"steps", last.step},
                        {"records", trace.records.size()},
                        {"final_t", last.t},
                        {"final_H", last.entropy},
                        {"final_fisher", last.fisher}};
  report["partial"] = partial;
  return trace;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadArguments:
    case ErrorCode::UnknownFamily:
    case ErrorCode::SizeLimit:
    case ErrorCode::Io:
    case ErrorCode::ZeroMass:
    case ErrorCode::NotNormalized:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NotTangent:
    case ErrorCode::InsufficientTrace:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::generate: return "generate";
    case Command::sinkhorn: return "sinkhorn";
    case Command::flow: return "flow";
    case Command::spectral: return "spectral";
    case Command::certify: return "certify";
  }
  return "?";
}

json to_json(const SpectralReport& r) {
  return json{{"poincare_c", r.poincare_c},
              {"gap", r.gap},
              {"rate1", optional_json(r.rate1)},
              {"rate2", optional_json(r.rate2)},
              {"max_residual", r.max_residual}};
}

json to_json(const CertificateReport& r) {
  json plan = r.plan ? json(*r.plan) : json(nullptr);
  return json{{"epr_max_residual", optional_json(r.epr_max_residual)},
              {"epr_tolerance", r.epr_tolerance},
              {"lsi_lambda_hat", optional_json(r.decay.lambda_hat)},
              {"lsi_undefined", r.decay.undefined},
              {"decay_ok", r.decay.ok},
              {"decay_margin", r.decay.margin},
              {"max_poincare_c", optional_json(r.max_poincare_c)},
              {"plan", plan},
              {"passed", r.passed}};
}

json to_json(const ContractionResult& r) {
  double kerq = 0.0;
  for (const auto& s : r.steps) kerq = std::max(kerq, s.kerq_defect);
  return json{{"metric", std::string(to_string(r.metric))},
              {"defined", r.defined},
              {"worst_margin", optional_json(r.worst_margin())},
              {"norm_mismatch", r.norm_mismatch()},
              {"max_kerq_defect", kerq},
              {"records", r.steps.size()}};
}

CertificateReport certify_saved_trace(const FlowTrace& trace, const RunConfig& config) {
  CertificateReport report = certify_trace(trace, config.certificates.epr_tolerance);
  for (const auto& r : trace.records)
    if (r.poincare_c)
      report.max_poincare_c = std::max(report.max_poincare_c.value_or(0.0), *r.poincare_c);
  const double h0 = trace.records.front().entropy;
  const double tau = config.certificates.plan_tau;
  if (report.decay.lambda_hat && *report.decay.lambda_hat > 0.0 && h0 > 0.0)
    report.plan = plan_iterations(h0, tau, *report.decay.lambda_hat, config.flow.gamma);
  finalize(report);
  return report;
}

RunResult run(const RunConfig& config, Command command) {
  validate(config);
  fs::create_directories(config.output_dir);
  const Problem problem = generate(config.generator, config.epsilon);
  RunResult result;
  json& report = result.report;
  report = base_report(config, to_string(command));
  report["problem"] = problem_json(problem, config);

  switch (command) {
    case Command::generate: {
      json p{{"cost", matrix_json(problem.cost)},
             {"mu", std::vector<double>(problem.mu.masses().begin(), problem.mu.masses().end())},
             {"nu", std::vector<double>(problem.nu.masses().begin(), problem.nu.masses().end())},
             {"epsilon", problem.epsilon}};
      write_file(join(config.output_dir, "problem.json"), p.dump(2) + "\n");
      break;
    }
    case Command::sinkhorn: {
      const auto solved = sinkhorn_solve(problem, config.solver);
      std::ostringstream csv;
      write_sinkhorn_trace(csv, header_of(config), solved.trace);
      write_file(join(config.output_dir, "sinkhorn.csv"), csv.str());
      const auto& last = solved.trace.records.back();
      report["sinkhorn"] = json{{"mode", std::string(to_string(config.solver.mode))},
                                {"sweeps", solved.sweeps},
                                {"h_row", last.h_row},
                                {"h_col", last.h_col},
                                {"primal", primal_objective(solved.coupling, problem)},
                                {"dual", dual_objective(solved.potentials, problem)},
                                {"coupling", matrix_json(solved.coupling.table())}};
      break;
    }
    case Command::flow: {
      bool partial = false;
      run_flow(problem, config, false, report, partial);
      if (partial) result.exit_code = kExitNumerical;
      break;
    }
    case Command::spectral: {
      FlowIntegrator start(problem, config.flow.method, config.flow.gamma);
      const auto solved = sinkhorn_solve(problem, config.solver);
      report["spectral"] = json{
          {"initial", to_json(spectral_report(start.state().pi, problem.nu))},
          {"solution", to_json(spectral_report(solved.coupling, problem.nu))}};
      break;
    }
    case Command::certify: {
      bool partial = false;
      const FlowTrace trace = run_flow(problem, config, config.certificates.spectral, report, partial);
      CertificateReport cert = certify_saved_trace(trace, config);
      report["certificate"] = to_json(cert);
      bool passed = cert.passed;
      if (config.certificates.contraction) {
        const auto delta = random_tangent(problem, config);
        json c;
        for (Metric metric : {Metric::inv_pi_sq, Metric::fisher_rao}) {
          const auto res = contraction_experiment(problem, delta, metric, config.flow.gamma,
                                                  config.flow.n_steps, config.flow.record_every);
          c[std::string(to_string(metric))] = to_json(res);
          const auto margin = res.worst_margin();
          if (margin && *margin < -1e-6) passed = false;
        }
        report["contraction"] = c;
      }
      report["passed"] = passed;
      if (partial)
        result.exit_code = kExitNumerical;
      else if (!passed)
        result.exit_code = kExitCertificate;
      break;
    }
  }
  write_outputs(config, report);
  return result;
}

RunResult run_certify_trace(const RunConfig& config, const std::string& trace_path) {
  validate(config);
  fs::create_directories(config.output_dir);
  std::istringstream in(read_file(trace_path));
  RunHeader header;
  const FlowTrace trace = read_flow_trace(in, &header);
  if (trace.records.empty()) throw Error(ErrorCode::InsufficientTrace, "trace has no records");
  RunResult result;
  result.report = base_report(config, "certify");
  result.report["source_trace"] = json{{"config_hash", header.config_hash}, {"seed", header.seed}};
  const CertificateReport cert = certify_saved_trace(trace, config);
  result.report["certificate"] = to_json(cert);
  result.report["passed"] = cert.passed;
  result.exit_code = cert.passed ? kExitPass : kExitCertificate;
  write_file(join(config.output_dir, "report.json"), result.report.dump(2) + "\n");
  return result;
}

RunResult run_plan(const RunConfig& config, const PlanRequest& request) {
  validate(config);
  RunResult result;
  result.report = base_report(config, "plan");
  double h0 = request.h0.value_or(0.0);
  double lambda = request.lambda.value_or(0.0);
  if (!request.h0 || !request.lambda) {
    const Problem problem = generate(config.generator, config.epsilon);
    RecordHook hook = [](const FlowState&, FlowRecord& r) { r.lsi_ratio = lsi_ratio(r); };
    const FlowTrace trace = integrate(problem, config.flow, hook);
    const auto decay = decay_certificate(trace);
    if (!request.h0) h0 = trace.records.front().entropy;
    if (!request.lambda) {
      if (!decay.lambda_hat) throw Error(ErrorCode::BadArguments, "flow trace has no defined LSI ratio");
      lambda = *decay.lambda_hat;
    }
  }
  const double gamma = request.gamma.value_or(config.flow.gamma);
  const double tau = request.tau.value_or(config.certificates.plan_tau);
  const long n = plan_iterations(h0, tau, lambda, gamma);
  result.report["plan"] = json{{"h0", h0}, {"tau", tau}, {"lambda", lambda}, {"gamma", gamma},
                               {"iterations", n}};
  return result;
}

}  // namespace sinkflow
