#include "sinkflow/measures.hpp"

#include <cmath>
#include <sstream>

#include "sinkflow/error.hpp"
#include "sinkflow/kernels.hpp"

namespace sinkflow {

namespace {

void check_positive_and_normalized(std::span<const double> values, const char* what) {
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      std::ostringstream os;
      os << what << " entry " << i << " = " << values[i];
      throw Error(ErrorCode::ZeroMass, os.str());
    }
    total += values[i];
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << " total mass " << total;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
}

}  // namespace

DiscreteMeasure DiscreteMeasure::validated(std::vector<double> masses, std::vector<double> labels) {
  if (masses.empty()) throw Error(ErrorCode::ShapeMismatch, "empty measure");
  if (!labels.empty() && labels.size() != masses.size())
    throw Error(ErrorCode::ShapeMismatch, "labels and masses differ in length");
  check_positive_and_normalized(masses, "measure");
  DiscreteMeasure out;
  out.masses_ = std::move(masses);
  out.labels_ = std::move(labels);
  return out;
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<double> weights,
                                            std::vector<double> labels) {
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return validated(std::move(weights), std::move(labels));
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
  return validated(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Coupling Coupling::validated(Matrix table) {
  if (table.size() == 0) throw Error(ErrorCode::ShapeMismatch, "empty coupling");
  check_positive_and_normalized(table.data(), "coupling");
  std::vector<double> row(table.rows());
  std::vector<double> col(table.cols());
  kernels::parallel::row_sums(table, row);
  kernels::parallel::col_sums(table, col);
  Coupling out;
  out.row_ = DiscreteMeasure::validated(std::move(row));
  out.col_ = DiscreteMeasure::validated(std::move(col));
  out.table_ = std::move(table);
  return out;
}

Perturbation Perturbation::validated(Matrix table) {
  double total = 0.0;
  for (double v : table.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "perturbation entry");
    total += v;
  }
  if (std::abs(total) > 1e-12) {
    std::ostringstream os;
    os << "perturbation total mass " << total;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
  Perturbation out;
  out.table_ = std::move(table);
  return out;
}

bool Perturbation::is_tangent(double tol) const {
  std::vector<double> rows(table_.rows());
  kernels::parallel::row_sums(table_, rows);
  for (double r : rows)
    if (std::abs(r) > tol) return false;
  return true;
}

Matrix Perturbation::log_direction(const Coupling& at) const {
  if (!table_.same_shape(at.table())) throw Error(ErrorCode::ShapeMismatch, "perturbation");
  Matrix out(table_.rows(), table_.cols());
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = table_.data()[k] / at.table().data()[k];
  return out;
}

double relative_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::ShapeMismatch, "relative entropy");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) h += p[i] * std::log(p[i] / q[i]);
  return h;
}

double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  return relative_entropy(p.masses(), q.masses());
}

double relative_entropy(const Coupling& p, const Coupling& q) {
  if (!p.table().same_shape(q.table())) throw Error(ErrorCode::ShapeMismatch, "relative entropy");
  return relative_entropy(p.table().data(), q.table().data());
}

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& rho) {
  Matrix table(mu.size(), rho.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < rho.size(); ++j) table(i, j) = mu[i] * rho[j];
  return Coupling::validated(std::move(table));
}

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const Coupling& pi) {
  return {pi.row_marginal(), pi.col_marginal()};
}

std::vector<double> log_ratio(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::ShapeMismatch, "log ratio");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(p[i] / q[i]);
  return out;
}

}  // namespace sinkflow
