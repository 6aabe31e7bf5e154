#include "sinkflow/config.hpp"

#include <cstdio>
#include <fstream>

#include "sinkflow/error.hpp"

namespace sinkflow {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadArguments, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadArguments, "config must be a JSON object");
  RunConfig c;
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    read(g, "family", c.generator.family);
    read(g, "n", c.generator.n);
    read(g, "m", c.generator.m);
    read(g, "seed", c.generator.seed);
    read(g, "mixing", c.generator.mixing);
  }
  read(j, "epsilon", c.epsilon);
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    read(f, "gamma", c.flow.gamma);
    read(f, "steps", c.flow.n_steps);
    read(f, "record_every", c.flow.record_every);
    read(f, "checkpoint_every", c.checkpoint_every);
    std::string method(to_string(c.flow.method));
    read(f, "method", method);
    c.flow.method = parse_method(method);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    read(s, "tol", c.solver.tol);
    read(s, "max_sweeps", c.solver.max_sweeps);
    read(s, "track_reference", c.solver.track_reference);
    std::string mode(to_string(c.solver.mode));
    read(s, "mode", mode);
    c.solver.mode = parse_sinkhorn_mode(mode);
  }
  if (j.contains("certificates")) {
    const json& k = j.at("certificates");
    read(k, "spectral", c.certificates.spectral);
    read(k, "contraction", c.certificates.contraction);
    read(k, "epr_tolerance", c.certificates.epr_tolerance);
    read(k, "plan_tau", c.certificates.plan_tau);
    read(k, "perturbation_scale", c.certificates.perturbation_scale);
  }
  read(j, "output_dir", c.output_dir);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadArguments, "config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  return json{
      {"generator",
       {{"family", c.generator.family},
        {"n", c.generator.n},
        {"m", c.generator.m},
        {"seed", c.generator.seed},
        {"mixing", c.generator.mixing}}},
      {"epsilon", c.epsilon},
      {"flow",
       {{"gamma", c.flow.gamma},
        {"steps", c.flow.n_steps},
        {"record_every", c.flow.record_every},
        {"checkpoint_every", c.checkpoint_every},
        {"method", std::string(to_string(c.flow.method))}}},
      {"solver",
       {{"tol", c.solver.tol},
        {"max_sweeps", c.solver.max_sweeps},
        {"track_reference", c.solver.track_reference},
        {"mode", std::string(to_string(c.solver.mode))}}},
      {"certificates",
       {{"spectral", c.certificates.spectral},
        {"contraction", c.certificates.contraction},
        {"epr_tolerance", c.certificates.epr_tolerance},
        {"plan_tau", c.certificates.plan_tau},
        {"perturbation_scale", c.certificates.perturbation_scale}}},
  };
}

void validate(const RunConfig& c) {
  if (c.generator.n < 2 || c.generator.m < 2)
    throw Error(ErrorCode::BadArguments, "sizes must be at least 2");
  if (c.certificates.spectral && c.generator.n * c.generator.m > 4096)
    throw Error(ErrorCode::SizeLimit, "spectral certificates need n*m <= 4096");
  if (!(c.epsilon > 0.0)) throw Error(ErrorCode::BadArguments, "epsilon must be positive");
  if (!(c.flow.gamma > 0.0) || c.flow.n_steps < 0 || c.flow.record_every < 1 ||
      c.checkpoint_every < 0)
    throw Error(ErrorCode::BadArguments, "invalid flow parameters");
  if (!(c.solver.tol > 0.0) || c.solver.max_sweeps < 1)
    throw Error(ErrorCode::BadArguments, "invalid solver parameters");
  if (!(c.certificates.plan_tau > 0.0) || !(c.certificates.perturbation_scale > 0.0) ||
      !(c.certificates.epr_tolerance > 0.0))
    throw Error(ErrorCode::BadArguments, "invalid certificate parameters");
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sinkflow
