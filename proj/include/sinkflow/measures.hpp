#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sinkflow/matrix.hpp"

namespace sinkflow {

/// Largest tolerated deviation of a total mass from 1 at validation.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Strictly positive probability vector on an indexed grid.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Throws ZeroMass if any entry is <= 0 and NotNormalized if the total
  /// deviates from 1 by more than kNormalizationTolerance.
  static DiscreteMeasure validated(std::vector<double> masses, std::vector<double> labels = {});

  /// Rescales positive weights to unit mass before validating.
  static DiscreteMeasure normalized(std::vector<double> weights, std::vector<double> labels = {});

  static DiscreteMeasure uniform(std::size_t n);

  std::size_t size() const noexcept { return masses_.size(); }
  double operator[](std::size_t i) const noexcept { return masses_[i]; }
  std::span<const double> masses() const noexcept { return masses_; }
  /// Grid coordinates, empty when the measure was not built on a grid.
  std::span<const double> labels() const noexcept { return labels_; }

 private:
  std::vector<double> masses_;
  std::vector<double> labels_;
};

/// Strictly positive joint probability table with cached marginals.
class Coupling {
 public:
  Coupling() = default;

  static Coupling validated(Matrix table);

  std::size_t rows() const noexcept { return table_.rows(); }
  std::size_t cols() const noexcept { return table_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return table_(i, j); }
  const Matrix& table() const noexcept { return table_; }

  const DiscreteMeasure& row_marginal() const noexcept { return row_; }
  const DiscreteMeasure& col_marginal() const noexcept { return col_; }

 private:
  Matrix table_;
  DiscreteMeasure row_;
  DiscreteMeasure col_;
};

/// Signed table of zero total mass: a direction at a coupling.
class Perturbation {
 public:
  Perturbation() = default;

  /// Throws NotNormalized if the entries do not sum to 0 within 1e-12.
  static Perturbation validated(Matrix table);

  const Matrix& table() const noexcept { return table_; }
  std::size_t rows() const noexcept { return table_.rows(); }
  std::size_t cols() const noexcept { return table_.cols(); }

  /// Tangent to the set of couplings with fixed row marginal: all row sums vanish.
  bool is_tangent(double tol = 1e-10) const;

  /// Induced dual direction delta_pi / pi.
  Matrix log_direction(const Coupling& at) const;

 private:
  Matrix table_;
};

/// Sum of p log(p / q) in nats. Throws ShapeMismatch on length mismatch.
double relative_entropy(std::span<const double> p, std::span<const double> q);
double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q);
double relative_entropy(const Coupling& p, const Coupling& q);

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& rho);

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const Coupling& pi);

/// log(p_i / q_i) entrywise.
std::vector<double> log_ratio(std::span<const double> p, std::span<const double> q);

}  // namespace sinkflow
