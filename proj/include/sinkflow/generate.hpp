#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sinkflow/eot.hpp"

namespace sinkflow {

enum class Family { uniform_random, gaussian_1d, bimodal_1d, diag_concentrated };

std::string_view to_string(Family family);
/// Accepts the hyphenated names ("uniform-random", ...). Throws UnknownFamily.
Family parse_family(std::string_view name);

struct GeneratorSpec {
  std::string family = "uniform-random";
  std::size_t n = 6;
  std::size_t m = 6;
  std::uint64_t seed = 7;
  double mixing = 0.02;  // diag-concentrated: off-diagonal Gibbs mass on 2 x 2
};

/// Deterministic instance for (family, sizes, seed).
///
/// Grid families place points on [0, 1] with squared-distance cost and use
/// `epsilon` as given. diag-concentrated uses uniform marginals and picks
/// epsilon so that adjacent grid points have Gibbs weight ratio
/// mixing / (1 - mixing); on 2 x 2 with mixing 0.02 the Gibbs coupling is
/// [[0.49, 0.01], [0.01, 0.49]].
Problem generate(const GeneratorSpec& spec, double epsilon);

}  // namespace sinkflow
