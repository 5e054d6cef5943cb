#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fnarx/features.hpp"

namespace fnarx {

/// Nonzero entries of one exponent vector, sorted by variable.
struct SparseMonomial {
  std::vector<std::uint32_t> vars;
  std::vector<std::uint32_t> exps;
};

/// Truncated set {α : ‖α‖₀ ≤ r, ‖α‖_q ≤ d}, ordered by total degree, then
/// reverse-lexicographically within a degree: (0,0), (1,0), (0,1), (2,0), ...
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(std::size_t dimension, std::size_t degree, std::size_t interaction,
                double q, std::vector<std::vector<std::uint32_t>> indices);

  std::size_t dimension() const { return dimension_; }
  std::size_t degree() const { return degree_; }
  std::size_t interaction() const { return interaction_; }
  double q() const { return q_; }
  std::size_t size() const { return terms_.size(); }

  const std::vector<SparseMonomial>& terms() const { return terms_; }
  const SparseMonomial& term(std::size_t k) const { return terms_[k]; }
  std::vector<std::uint32_t> dense(std::size_t k) const;
  std::size_t max_exponent() const { return max_exponent_; }

  bool operator==(const MultiIndexSet& o) const;

 private:
  std::size_t dimension_ = 0;
  std::size_t degree_ = 0;
  std::size_t interaction_ = 0;
  double q_ = 1.0;
  std::size_t max_exponent_ = 0;
  std::vector<SparseMonomial> terms_;
};

/// q-quasi-norm (Σ α_i^q)^(1/q).
double q_norm(std::span<const std::uint32_t> alpha, double q);

MultiIndexSet generate_multi_indices(std::size_t dimension, std::size_t degree,
                                     std::size_t interaction, double q);

/// Reusable power table for evaluate_row / evaluate_terms.
class MonomialScratch {
 public:
  void prepare(const MultiIndexSet& set);
  double* powers() { return powers_.data(); }

 private:
  std::vector<double> powers_;
};

/// Ψ row for one feature vector, all terms.
void evaluate_row(const MultiIndexSet& set, const double* xi, double* out,
                  MonomialScratch& scratch);

/// Values of the listed terms only (forecast loop).
void evaluate_terms(const MultiIndexSet& set, std::span<const std::size_t> terms,
                    const double* xi, double* out, MonomialScratch& scratch);

std::vector<double> evaluate_single(const MultiIndexSet& set,
                                    std::span<const double> xi);

/// Ψ (rows x |A|), parallel over rows.
Eigen::MatrixXd evaluate_regressors(const MultiIndexSet& set, const FeatureMatrix& f);
Eigen::MatrixXd evaluate_regressors(const MultiIndexSet& set, const RowMatrix& f);
Eigen::MatrixXd evaluate_regressors_serial(const MultiIndexSet& set,
                                           const RowMatrix& f);

}  // namespace fnarx
