#include "fnarx/basis.hpp"

#include <algorithm>
#include <cmath>

#include "fnarx/error.hpp"
#include "omp_for.hpp"

namespace fnarx {

double q_norm(std::span<const std::uint32_t> alpha, double q) {
  double s = 0.0;
  for (auto a : alpha) {
    if (a != 0) s += std::pow(static_cast<double>(a), q);
  }
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / q);
}

MultiIndexSet::MultiIndexSet(std::size_t dimension, std::size_t degree,
                             std::size_t interaction, double q,
                             std::vector<std::vector<std::uint32_t>> indices)
    : dimension_(dimension), degree_(degree), interaction_(interaction), q_(q) {
  terms_.reserve(indices.size());
  for (const auto& alpha : indices) {
    if (alpha.size() != dimension) {
      throw_invalid("multi-index of length " + std::to_string(alpha.size()) +
                    " in a set of dimension " + std::to_string(dimension));
    }
    SparseMonomial m;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] == 0) continue;
      m.vars.push_back(static_cast<std::uint32_t>(i));
      m.exps.push_back(alpha[i]);
      max_exponent_ = std::max<std::size_t>(max_exponent_, alpha[i]);
    }
    terms_.push_back(std::move(m));
  }
}

std::vector<std::uint32_t> MultiIndexSet::dense(std::size_t k) const {
  std::vector<std::uint32_t> alpha(dimension_, 0);
  const auto& t = terms_.at(k);
  for (std::size_t i = 0; i < t.vars.size(); ++i) alpha[t.vars[i]] = t.exps[i];
  return alpha;
}

bool MultiIndexSet::operator==(const MultiIndexSet& o) const {
  if (dimension_ != o.dimension_ || terms_.size() != o.terms_.size()) return false;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].vars != o.terms_[k].vars || terms_[k].exps != o.terms_[k].exps) {
      return false;
    }
  }
  return true;
}

namespace {

struct Enumerator {
  std::size_t dim;
  std::size_t r;
  double q;
  double bound;  // d + slack
  std::vector<std::uint32_t> alpha;
  std::size_t nnz = 0;
  std::vector<std::vector<std::uint32_t>> out;

  void run(std::size_t start, std::uint32_t remaining) {
    if (remaining == 0) {
      if (q_norm(alpha, q) <= bound) out.push_back(alpha);
      return;
    }
    if (nnz == r) return;
    for (std::size_t i = start; i < dim; ++i) {
      for (std::uint32_t e = remaining; e >= 1; --e) {
        alpha[i] = e;
        ++nnz;
        // ‖·‖_q only grows as entries are added, so a violated bound prunes.
        if (q_norm(alpha, q) <= bound + 1e-9) run(i + 1, remaining - e);
        --nnz;
        alpha[i] = 0;
      }
    }
  }
};

}  // namespace

MultiIndexSet generate_multi_indices(std::size_t dimension, std::size_t degree,
                                     std::size_t interaction, double q) {
  if (dimension < 1) throw_invalid("multi-index dimension must be >= 1");
  if (degree < 1) throw_invalid("polynomial degree must be >= 1");
  if (interaction < 1 || interaction > dimension) {
    throw_invalid("interaction order must lie in [1, " + std::to_string(dimension) +
                  "], got " + std::to_string(interaction));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw_invalid("q-norm must lie in (0, 1], got " + std::to_string(q));
  }
  Enumerator en{dimension, interaction, q, static_cast<double>(degree) + 1e-12,
                std::vector<std::uint32_t>(dimension, 0), 0, {}};
  for (std::uint32_t k = 0; k <= degree; ++k) en.run(0, k);
  return MultiIndexSet(dimension, degree, interaction, q, std::move(en.out));
}

void MonomialScratch::prepare(const MultiIndexSet& set) {
  const std::size_t need = set.dimension() * (set.max_exponent() + 1);
  if (powers_.size() < need) powers_.resize(need);
}

namespace {

void fill_powers(const MultiIndexSet& set, const double* xi, double* p) {
  const std::size_t stride = set.max_exponent() + 1;
  for (std::size_t i = 0; i < set.dimension(); ++i) {
    double* row = p + i * stride;
    row[0] = 1.0;
    for (std::size_t e = 1; e < stride; ++e) row[e] = row[e - 1] * xi[i];
  }
}

inline double monomial(const SparseMonomial& m, const double* p, std::size_t stride) {
  double v = 1.0;
  for (std::size_t k = 0; k < m.vars.size(); ++k) {
    v *= p[m.vars[k] * stride + m.exps[k]];
  }
  return v;
}

}  // namespace

void evaluate_row(const MultiIndexSet& set, const double* xi, double* out,
                  MonomialScratch& scratch) {
  scratch.prepare(set);
  double* p = scratch.powers();
  fill_powers(set, xi, p);
  const std::size_t stride = set.max_exponent() + 1;
  const auto& terms = set.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) out[k] = monomial(terms[k], p, stride);
}

void evaluate_terms(const MultiIndexSet& set, std::span<const std::size_t> terms,
                    const double* xi, double* out, MonomialScratch& scratch) {
  scratch.prepare(set);
  double* p = scratch.powers();
  fill_powers(set, xi, p);
  const std::size_t stride = set.max_exponent() + 1;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    out[k] = monomial(set.term(terms[k]), p, stride);
  }
}

std::vector<double> evaluate_single(const MultiIndexSet& set,
                                    std::span<const double> xi) {
  if (xi.size() != set.dimension()) {
    throw_invalid("feature vector has " + std::to_string(xi.size()) +
                  " entries, basis expects " + std::to_string(set.dimension()));
  }
  std::vector<double> out(set.size());
  MonomialScratch scratch;
  evaluate_row(set, xi.data(), out.data(), scratch);
  return out;
}

namespace {

void check_features(const MultiIndexSet& set, const RowMatrix& f) {
  if (static_cast<std::size_t>(f.cols()) != set.dimension()) {
    throw_invalid("feature width " + std::to_string(f.cols()) +
                  " does not match basis dimension " + std::to_string(set.dimension()));
  }
  if (!f.allFinite()) throw Error(ErrorKind::kNumerical, "non-finite feature value");
}

void regressor_rows(const MultiIndexSet& set, const RowMatrix& f,
                    Eigen::MatrixXd& psi, Eigen::Index begin, Eigen::Index end) {
  MonomialScratch scratch;
  std::vector<double> row(set.size());
  for (Eigen::Index r = begin; r < end; ++r) {
    evaluate_row(set, f.data() + r * f.cols(), row.data(), scratch);
    for (std::size_t k = 0; k < row.size(); ++k) psi(r, static_cast<Eigen::Index>(k)) = row[k];
  }
}

}  // namespace

Eigen::MatrixXd evaluate_regressors(const MultiIndexSet& set, const FeatureMatrix& f) {
  return evaluate_regressors(set, f.values);
}

Eigen::MatrixXd evaluate_regressors(const MultiIndexSet& set, const RowMatrix& f) {
  check_features(set, f);
  Eigen::MatrixXd psi(f.rows(), static_cast<Eigen::Index>(set.size()));
  constexpr Eigen::Index kChunk = 256;
  const Eigen::Index rows = f.rows();
  detail::omp_for(static_cast<std::size_t>((rows + kChunk - 1) / kChunk),
                  [&](std::size_t c) {
                    const auto b = static_cast<Eigen::Index>(c) * kChunk;
                    regressor_rows(set, f, psi, b, std::min(rows, b + kChunk));
                  },
                  false);
  return psi;
}

Eigen::MatrixXd evaluate_regressors_serial(const MultiIndexSet& set,
                                           const RowMatrix& f) {
  check_features(set, f);
  Eigen::MatrixXd psi(f.rows(), static_cast<Eigen::Index>(set.size()));
  regressor_rows(set, f, psi, 0, f.rows());
  return psi;
}

}  // namespace fnarx
