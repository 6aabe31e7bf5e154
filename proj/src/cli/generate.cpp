#include "sinkflow/generate.hpp"

#include <cmath>
#include <vector>

#include "sinkflow/error.hpp"
#include "sinkflow/rng.hpp"

namespace sinkflow {

namespace {

constexpr std::uint64_t kCostStream = 0;
constexpr std::uint64_t kMuStream = 1;
constexpr std::uint64_t kNuStream = 2;

std::vector<double> grid(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

double gaussian(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z);
}

Matrix squared_distance(const std::vector<double>& x, const std::vector<double>& y) {
  Matrix c(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) c(i, j) = (x[i] - y[j]) * (x[i] - y[j]);
  return c;
}

// Density floor keeps far tails strictly positive after normalization.
DiscreteMeasure discretize(const std::vector<double>& x, auto density) {
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = density(x[i]) + 1e-6;
  return DiscreteMeasure::normalized(std::move(w), x);
}

// Independent substreams per object so that sizes do not shift other draws.
CounterRng stream(std::uint64_t seed, std::uint64_t id) {
  return CounterRng(CounterRng::mix(seed ^ CounterRng::mix(id + 0x5EED)));
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::uniform_random: return "uniform-random";
    case Family::gaussian_1d: return "gaussian-1d";
    case Family::bimodal_1d: return "bimodal-1d";
    case Family::diag_concentrated: return "diag-concentrated";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::uniform_random, Family::gaussian_1d, Family::bimodal_1d,
                   Family::diag_concentrated})
    if (to_string(f) == name) return f;
  throw Error(ErrorCode::UnknownFamily, "unknown generator family '" + std::string(name) + "'");
}

Problem generate(const GeneratorSpec& spec, double epsilon) {
  const Family family = parse_family(spec.family);
  if (spec.n < 2 || spec.m < 2) throw Error(ErrorCode::BadArguments, "sizes must be at least 2");
  const auto x = grid(spec.n);
  const auto y = grid(spec.m);

  switch (family) {
    case Family::uniform_random: {
      auto rc = stream(spec.seed, kCostStream);
      auto rm = stream(spec.seed, kMuStream);
      auto rn = stream(spec.seed, kNuStream);
      Matrix c(spec.n, spec.m);
      for (double& v : c.data()) v = rc.uniform();
      std::vector<double> a(spec.n), b(spec.m);
      for (double& v : a) v = rm.uniform(0.1, 1.0);
      for (double& v : b) v = rn.uniform(0.1, 1.0);
      return Problem::make(std::move(c), epsilon, DiscreteMeasure::normalized(std::move(a)),
                           DiscreteMeasure::normalized(std::move(b)));
    }
    case Family::gaussian_1d: {
      auto rm = stream(spec.seed, kMuStream);
      const double shift = rm.uniform(-0.05, 0.05);
      auto mu = discretize(x, [&](double t) { return gaussian(t, 0.35 + shift, 0.12); });
      auto nu = discretize(y, [&](double t) { return gaussian(t, 0.65 - shift, 0.18); });
      return Problem::make(squared_distance(x, y), epsilon, std::move(mu), std::move(nu));
    }
    case Family::bimodal_1d: {
      auto rm = stream(spec.seed, kMuStream);
      const double weight = rm.uniform(0.35, 0.65);
      auto mu = discretize(x, [](double t) { return gaussian(t, 0.5, 0.15); });
      auto nu = discretize(y, [&](double t) {
        return weight * gaussian(t, 0.2, 0.07) + (1.0 - weight) * gaussian(t, 0.8, 0.07);
      });
      return Problem::make(squared_distance(x, y), epsilon, std::move(mu), std::move(nu));
    }
    case Family::diag_concentrated: {
      if (!(spec.mixing > 0.0 && spec.mixing < 0.5))
        throw Error(ErrorCode::BadArguments, "mixing must lie in (0, 0.5)");
      const double h = 1.0 / static_cast<double>(std::max(spec.n, spec.m) - 1);
      const double eps = h * h / std::log((1.0 - spec.mixing) / spec.mixing);
      Matrix c = squared_distance(x, y);
      return Problem::make(std::move(c), eps, DiscreteMeasure::uniform(spec.n),
                           DiscreteMeasure::uniform(spec.m));
    }
  }
  throw Error(ErrorCode::UnknownFamily, spec.family);
}

}  // namespace sinkflow
