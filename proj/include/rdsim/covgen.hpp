#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdsim/graph.hpp"
#include "rdsim/random.hpp"

namespace rdsim {

// Standard normal CDF and quantile. The quantile uses Wichura's AS241
// rational approximation (relative error below 1e-15).
double normal_cdf(double x);
double normal_quantile(double p);

// P(X <= a, Y <= b) for standard bivariate normal (X, Y) with correlation rho,
// by adaptive quadrature over rho after the substitution r = sin(t).
double bivariate_normal_cdf(double a, double b, double rho);

// Pearson correlation of the indicators 1{X > t1}, 1{Y > t2} where the
// thresholds give marginals p1 and p2 and (X, Y) has latent correlation rho.
double binary_correlation(double p1, double p2, double rho);

// Range of Pearson correlations attainable by two binaries with marginals
// p1, p2 (the Frechet bounds on P(both = 1)).
struct CorrelationRange {
  double lower;
  double upper;
};
CorrelationRange binary_correlation_range(double p1, double p2);

// Latent correlation giving binary correlation r_target (within 1e-4 and in
// practice to ~1e-12). Throws DomainError naming the feasible interval.
double solve_latent_correlation(double p1, double p2, double r_target);

struct CovariateSpec {
  std::vector<std::string> names;
  std::vector<double> marginals;
  Eigen::MatrixXd correlations;  // binary Pearson targets, unit diagonal

  std::size_t size() const noexcept { return marginals.size(); }
  // Throws DomainError describing the first violated invariant.
  void validate() const;
};

struct LatentCorrelation {
  Eigen::MatrixXd matrix;
  bool repaired = false;  // eigenvalues were clipped to restore definiteness
};

// Pairwise latent solves assembled into a correlation matrix; projected to
// the nearest correlation matrix (eigenvalues clipped at 1e-6, unit diagonal
// restored) when not positive definite.
LatentCorrelation latent_correlation_matrix(const CovariateSpec& spec);

// Row-major n x k binary matrix.
class CovariateMatrix {
 public:
  CovariateMatrix() = default;
  CovariateMatrix(std::vector<std::string> names, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::uint8_t operator()(std::size_t row, std::size_t col) const {
    return data_[row * cols() + col];
  }
  std::uint8_t& operator()(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }

  AttributeVector column(std::size_t col) const;
  std::vector<AttributeVector> columns() const;
  static CovariateMatrix from_columns(std::span<const AttributeVector> columns);

 private:
  std::vector<std::string> names_;
  std::size_t rows_ = 0;
  std::vector<std::uint8_t> data_;
};

// Gaussian-copula draw of n rows of correlated binaries matching spec's
// marginals and correlations. Writes a warning to std::clog if the latent
// matrix needed repair; throws DomainError if it cannot be factorized.
CovariateMatrix generate_binary_covariates(const CovariateSpec& spec, std::size_t n, Rng& rng);

// Empirical Pearson correlation between two binary columns.
double empirical_correlation(const CovariateMatrix& m, std::size_t a, std::size_t b);

}  // namespace rdsim
