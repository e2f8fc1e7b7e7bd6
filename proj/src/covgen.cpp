#include "rdsim/covgen.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include <fmt/format.h>

#include "rdsim/errors.hpp"

namespace rdsim {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -INFINITY;
    if (p == 1.0) return INFINITY;
    throw DomainError(fmt::format("normal quantile: probability {} outside [0, 1]", p));
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

namespace {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(F f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

void check_marginal(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("{} {} outside (0, 1)", what, p));
}

}  // namespace

double bivariate_normal_cdf(double a, double b, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("correlation outside [-1, 1]");
  const double fa = normal_cdf(a), fb = normal_cdf(b);
  if (rho == 1.0) return std::min(fa, fb);
  if (rho == -1.0) return std::max(0.0, fa + fb - 1.0);
  // d/drho Phi2 = phi2(a, b; rho); with rho = sin t the 1/sqrt(1 - rho^2)
  // factor cancels against d rho = cos t dt, leaving a bounded integrand.
  auto integrand = [a, b](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double c2 = c * c;
    if (c2 <= 0.0) return 0.0;
    return std::exp(-(a * a - 2.0 * a * b * s + b * b) / (2.0 * c2));
  };
  const double integral = integrate(integrand, 0.0, std::asin(rho), 1e-13);
  return std::clamp(fa * fb + integral / (2.0 * std::numbers::pi), 0.0, std::min(fa, fb));
}

double binary_correlation(double p1, double p2, double rho) {
  check_marginal(p1, "marginal");
  check_marginal(p2, "marginal");
  const double both = bivariate_normal_cdf(normal_quantile(p1), normal_quantile(p2), rho);
  return (both - p1 * p2) / std::sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2));
}

CorrelationRange binary_correlation_range(double p1, double p2) {
  check_marginal(p1, "marginal");
  check_marginal(p2, "marginal");
  const double scale = std::sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2));
  return {(std::max(0.0, p1 + p2 - 1.0) - p1 * p2) / scale, (std::min(p1, p2) - p1 * p2) / scale};
}

double solve_latent_correlation(double p1, double p2, double r_target) {
  const auto range = binary_correlation_range(p1, p2);
  if (!(r_target >= range.lower && r_target <= range.upper)) {
    throw DomainError(fmt::format(
        "binary correlation {} infeasible for marginals ({}, {}): feasible interval [{}, {}]",
        r_target, p1, p2, range.lower, range.upper));
  }
  if (r_target == range.upper) return 1.0;
  if (r_target == range.lower) return -1.0;
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = binary_correlation(p1, p2, mid);
    if (r == r_target) return mid;
    (r < r_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void CovariateSpec::validate() const {
  const auto k = marginals.size();
  if (names.size() != k) throw DomainError("covariate names and marginals differ in length");
  if (correlations.rows() != static_cast<Eigen::Index>(k) ||
      correlations.cols() != static_cast<Eigen::Index>(k)) {
    throw DomainError(fmt::format("correlation matrix must be {}x{}", k, k));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(marginals[i] > 0.0 && marginals[i] < 1.0)) {
      throw DomainError(fmt::format("marginal of '{}' = {} outside (0, 1)", names[i], marginals[i]));
    }
    if (correlations(i, i) != 1.0) {
      throw DomainError(fmt::format("correlation diagonal for '{}' must be 1", names[i]));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (correlations(i, j) != correlations(j, i)) {
        throw DomainError(fmt::format("correlation matrix not symmetric at ({}, {})", names[i], names[j]));
      }
      const auto range = binary_correlation_range(marginals[i], marginals[j]);
      if (!(correlations(i, j) >= range.lower && correlations(i, j) <= range.upper)) {
        throw DomainError(fmt::format(
            "correlation {} between '{}' and '{}' outside feasible interval [{}, {}]",
            correlations(i, j), names[j], names[i], range.lower, range.upper));
      }
    }
  }
}

LatentCorrelation latent_correlation_matrix(const CovariateSpec& spec) {
  spec.validate();
  const auto k = static_cast<Eigen::Index>(spec.size());
  LatentCorrelation out{Eigen::MatrixXd::Identity(k, k), false};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double rho = solve_latent_correlation(spec.marginals[i], spec.marginals[j],
                                                  spec.correlations(i, j));
      out.matrix(i, j) = out.matrix(j, i) = rho;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
  if (eig.info() != Eigen::Success) throw DomainError("latent correlation matrix: eigensolver failed");
  constexpr double kFloor = 1e-6;
  if (eig.eigenvalues().minCoeff() < kFloor) {
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(kFloor);
    Eigen::MatrixXd a = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd inv_sd = a.diagonal().cwiseSqrt().cwiseInverse();
    out.matrix = inv_sd.asDiagonal() * a * inv_sd.asDiagonal();
    out.matrix.diagonal().setOnes();
    out.repaired = true;
  }
  return out;
}

CovariateMatrix::CovariateMatrix(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), rows_(rows), data_(rows * names_.size(), 0) {}

AttributeVector CovariateMatrix::column(std::size_t col) const {
  std::vector<std::uint8_t> values(rows_);
  for (std::size_t r = 0; r < rows_; ++r) values[r] = (*this)(r, col);
  return AttributeVector(names_[col], std::move(values));
}

std::vector<AttributeVector> CovariateMatrix::columns() const {
  std::vector<AttributeVector> out;
  for (std::size_t c = 0; c < cols(); ++c) out.push_back(column(c));
  return out;
}

CovariateMatrix CovariateMatrix::from_columns(std::span<const AttributeVector> columns) {
  std::vector<std::string> names;
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("covariate columns differ in length");
    names.push_back(c.name());
  }
  CovariateMatrix m(std::move(names), rows);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
  }
  return m;
}

CovariateMatrix generate_binary_covariates(const CovariateSpec& spec, std::size_t n, Rng& rng) {
  const auto latent = latent_correlation_matrix(spec);
  if (latent.repaired) {
    std::clog << "warning: latent correlation matrix was not positive definite; "
                 "using nearest correlation matrix\n";
  }
  Eigen::LLT<Eigen::MatrixXd> llt(latent.matrix);
  if (llt.info() != Eigen::Success) {
    throw DomainError("latent correlation matrix cannot be factorized");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const auto k = spec.size();
  std::vector<double> threshold(k);
  for (std::size_t j = 0; j < k; ++j) threshold[j] = normal_quantile(1.0 - spec.marginals[j]);

  CovariateMatrix out(spec.names, n);
  Eigen::VectorXd g(static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < k; ++j) g[static_cast<Eigen::Index>(j)] = rng.normal();
    const Eigen::VectorXd x = lower * g;
    for (std::size_t j = 0; j < k; ++j) {
      out(r, j) = x[static_cast<Eigen::Index>(j)] > threshold[j] ? 1 : 0;
    }
  }
  return out;
}

double empirical_correlation(const CovariateMatrix& m, std::size_t a, std::size_t b) {
  double sa = 0, sb = 0, sab = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    sa += m(r, a);
    sb += m(r, b);
    sab += m(r, a) * m(r, b);
  }
  const double n = static_cast<double>(m.rows());
  const double pa = sa / n, pb = sb / n;
  const double denom = std::sqrt(pa * (1 - pa) * pb * (1 - pb));
  if (denom == 0.0) throw UndefinedEstimand("correlation undefined for a constant column");
  return (sab / n - pa * pb) / denom;
}

}  // namespace rdsim
