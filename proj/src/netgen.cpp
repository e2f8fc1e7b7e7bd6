#include "rdsim/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "rdsim/errors.hpp"

namespace rdsim {

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

// ---------------------------------------------------------------------------
// Single-attribute moment solver

std::size_t NetworkTargets::group1_size() const {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
}

void NetworkTargets::validate() const {
  if (n < 2) throw DomainError(fmt::format("population size {} must be at least 2", n));
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("prevalence {} outside (0, 1)", p));
  const auto n1 = group1_size();
  if (n1 < 1 || n1 >= n) {
    throw DomainError(fmt::format("prevalence {} leaves an empty group at n = {}", p, n));
  }
  if (!(mean_degree > 0.0 && mean_degree <= static_cast<double>(n - 1))) {
    throw DomainError(fmt::format("mean degree {} outside (0, {}]", mean_degree, n - 1));
  }
  if (!(diff_activity > 0.0)) {
    throw DomainError(fmt::format("differential activity {} must be positive", diff_activity));
  }
  if (!(homophily_r >= 0.0) || !std::isfinite(homophily_r)) {
    throw DomainError(fmt::format("homophily R {} must be finite and nonnegative", homophily_r));
  }
}

namespace {

double pairs_within(std::size_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - (m > 0)); }

// Probability for a dyad class; tolerates rounding just outside [0, 1].
double class_probability(double expected, double dyads, const char* label) {
  constexpr double kSlack = 1e-9;
  if (expected < -kSlack * std::max(1.0, dyads)) {
    throw InfeasibleTargets(fmt::format("{} < 0 (expected edge count {})", label, expected));
  }
  if (dyads == 0.0) {
    if (expected > kSlack) {
      throw InfeasibleTargets(fmt::format("{} > 1 (class has no dyads but needs {} edges)", label, expected));
    }
    return 0.0;
  }
  const double q = expected / dyads;
  if (q > 1.0 + kSlack) {
    throw InfeasibleTargets(fmt::format("{} > 1 (needs {} edges among {} dyads)", label, expected, dyads));
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

DyadClassSolution solve_edge_targets(const NetworkTargets& t) {
  t.validate();
  DyadClassSolution s;
  s.n1 = t.group1_size();
  s.n0 = t.n - s.n1;
  const double n1 = static_cast<double>(s.n1), n0 = static_cast<double>(s.n0);
  const double total = static_cast<double>(t.n) * t.mean_degree / 2.0;
  const double r = t.homophily_r;
  // Substituting e11 = R e10 into the activity equation gives
  // e00 = (a - 1) e10 / 2 with a = n0 (2R + 1) / (Da n1).
  const double a = n0 * (2.0 * r + 1.0) / (t.diff_activity * n1);
  s.e10 = 2.0 * total / (2.0 * r + 1.0 + a);
  s.e11 = r * s.e10;
  s.e00 = 0.5 * (a - 1.0) * s.e10;
  if (s.e00 < 0.0 && s.e00 > -1e-9 * total) s.e00 = 0.0;
  s.q11 = class_probability(s.e11, pairs_within(s.n1), "q11");
  s.q10 = class_probability(s.e10, n1 * n0, "q10");
  s.q00 = class_probability(s.e00, pairs_within(s.n0), "q00");
  s.e00 = std::max(s.e00, 0.0);
  return s;
}

// ---------------------------------------------------------------------------
// Dyad-class samplers

namespace {

// Visits the chosen dyads of a Bernoulli(q) draw over a sequence of rows,
// where row i offers row_length(i) candidate dyads. Geometric skipping keeps
// the cost proportional to the number of edges.
template <class RowLength, class Emit>
void bernoulli_rows(std::size_t rows, RowLength row_length, double q, Rng& rng, Emit emit) {
  if (q <= 0.0) return;
  const bool all = q >= 1.0;
  auto next_skip = [&]() -> std::uint64_t { return all ? 0 : rng.geometric(q); };
  std::uint64_t skip = next_skip();
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint64_t len = row_length(i);
    std::uint64_t pos = 0;
    while (skip < len - pos) {
      pos += skip;
      emit(i, pos);
      ++pos;
      skip = next_skip();
    }
    skip -= len - pos;
  }
}

// k distinct indices from [0, m), sorted (Floyd's algorithm).
std::vector<std::uint64_t> sample_indices(std::uint64_t m, std::uint64_t k, Rng& rng) {
  std::vector<std::uint64_t> out;
  if (k >= m) {
    out.resize(m);
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return out;
  }
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = m - k; j < m; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

void within_bernoulli(std::span<const node_t> group, double q, Rng& rng, std::vector<Edge>& out) {
  const std::size_t m = group.size();
  if (m < 2) return;
  bernoulli_rows(
      m - 1, [m](std::size_t i) { return m - 1 - i; }, q, rng,
      [&](std::size_t i, std::uint64_t pos) { out.emplace_back(group[i], group[i + 1 + pos]); });
}

void between_bernoulli(std::span<const node_t> a, std::span<const node_t> b, double q, Rng& rng,
                       std::vector<Edge>& out) {
  if (a.empty() || b.empty()) return;
  const std::size_t len = b.size();
  bernoulli_rows(
      a.size(), [len](std::size_t) { return len; }, q, rng,
      [&](std::size_t i, std::uint64_t pos) { out.emplace_back(a[i], b[pos]); });
}

void within_exact(std::span<const node_t> group, std::uint64_t k, Rng& rng, std::vector<Edge>& out) {
  const std::uint64_t m = group.size();
  if (m < 2) return;
  std::uint64_t row = 0, row_start = 0, len = m - 1;
  for (const auto idx : sample_indices(m * (m - 1) / 2, k, rng)) {
    while (idx >= row_start + len) {
      row_start += len;
      ++row;
      --len;
    }
    out.emplace_back(group[row], group[row + 1 + (idx - row_start)]);
  }
}

void between_exact(std::span<const node_t> a, std::span<const node_t> b, std::uint64_t k, Rng& rng,
                   std::vector<Edge>& out) {
  if (a.empty() || b.empty()) return;
  for (const auto idx : sample_indices(a.size() * b.size(), k, rng)) {
    out.emplace_back(a[idx / b.size()], b[idx % b.size()]);
  }
}

std::uint64_t rounded_count(double e) { return static_cast<std::uint64_t>(std::llround(std::max(e, 0.0))); }

}  // namespace

Population generate_network(const NetworkTargets& t, Rng& rng, GenerationMode mode,
                            std::string attribute_name) {
  const auto sol = solve_edge_targets(t);
  std::vector<node_t> order(t.n);
  std::iota(order.begin(), order.end(), node_t{0});
  for (std::size_t i = 0; i < sol.n1; ++i) {
    std::swap(order[i], order[i + rng.below(t.n - i)]);
  }
  std::vector<std::uint8_t> z(t.n, 0);
  for (std::size_t i = 0; i < sol.n1; ++i) z[order[i]] = 1;
  std::vector<node_t> ones, zeros;
  for (node_t v = 0; v < t.n; ++v) (z[v] ? ones : zeros).push_back(v);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(sol.total() * 1.1) + 16);
  if (mode == GenerationMode::bernoulli) {
    within_bernoulli(ones, sol.q11, rng, edges);
    between_bernoulli(ones, zeros, sol.q10, rng, edges);
    within_bernoulli(zeros, sol.q00, rng, edges);
  } else {
    within_exact(ones, rounded_count(sol.e11), rng, edges);
    between_exact(ones, zeros, rounded_count(sol.e10), rng, edges);
    within_exact(zeros, rounded_count(sol.e00), rng, edges);
  }
  return {Graph(t.n, std::move(edges)), AttributeVector(std::move(attribute_name), std::move(z))};
}

// ---------------------------------------------------------------------------
// Multi-covariate dyad model

DyadModel DyadModel::zeros(std::vector<std::string> covariates) {
  DyadModel m;
  m.match.assign(covariates.size(), 0.0);
  m.activity.assign(covariates.size(), 0.0);
  m.covariates = std::move(covariates);
  return m;
}

Eigen::VectorXd DyadModel::to_vector() const {
  const auto k = covariates.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  v[0] = edges;
  for (std::size_t j = 0; j < k; ++j) {
    v[static_cast<Eigen::Index>(1 + j)] = match[j];
    v[static_cast<Eigen::Index>(1 + k + j)] = activity[j];
  }
  return v;
}

void DyadModel::assign(const Eigen::VectorXd& theta) {
  const auto k = covariates.size();
  edges = theta[0];
  for (std::size_t j = 0; j < k; ++j) {
    match[j] = theta[static_cast<Eigen::Index>(1 + j)];
    activity[j] = theta[static_cast<Eigen::Index>(1 + k + j)];
  }
}

Eigen::VectorXd ModelStatistics::to_vector() const {
  const auto k = match.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(1 + 2 * k));
  v[0] = edges;
  for (std::size_t j = 0; j < k; ++j) {
    v[static_cast<Eigen::Index>(1 + j)] = match[j];
    v[static_cast<Eigen::Index>(1 + k + j)] = ends[j];
  }
  return v;
}

ModelStatistics ModelStatistics::from_vector(const Eigen::VectorXd& v) {
  const auto k = static_cast<std::size_t>((v.size() - 1) / 2);
  ModelStatistics s;
  s.edges = v[0];
  s.match.resize(k);
  s.ends.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    s.match[j] = v[static_cast<Eigen::Index>(1 + j)];
    s.ends[j] = v[static_cast<Eigen::Index>(1 + k + j)];
  }
  return s;
}

namespace {

using Pattern = std::uint32_t;

std::map<Pattern, std::vector<node_t>> nodes_by_pattern(const CovariateMatrix& z) {
  if (z.cols() > 31) throw std::invalid_argument("at most 31 covariates are supported");
  std::map<Pattern, std::vector<node_t>> groups;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    Pattern key = 0;
    for (std::size_t c = 0; c < z.cols(); ++c) key |= Pattern{z(r, c)} << c;
    groups[key].push_back(static_cast<node_t>(r));
  }
  return groups;
}

// Sufficient-statistic vector of a single tie between patterns a and b.
Eigen::VectorXd dyad_features(Pattern a, Pattern b, std::size_t k) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(1 + 2 * k));
  x[0] = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    const unsigned za = (a >> j) & 1u, zb = (b >> j) & 1u;
    x[static_cast<Eigen::Index>(1 + j)] = za == zb ? 1.0 : 0.0;
    x[static_cast<Eigen::Index>(1 + k + j)] = static_cast<double>(za + zb);
  }
  return x;
}

struct DyadClass {
  Pattern a, b;
  double dyads;
  Eigen::VectorXd features;
};

std::vector<DyadClass> dyad_classes(const std::map<Pattern, std::vector<node_t>>& groups, std::size_t k) {
  std::vector<DyadClass> classes;
  for (auto i = groups.begin(); i != groups.end(); ++i) {
    for (auto j = i; j != groups.end(); ++j) {
      const double dyads = i == j ? pairs_within(i->second.size())
                                  : static_cast<double>(i->second.size()) * static_cast<double>(j->second.size());
      if (dyads > 0.0) classes.push_back({i->first, j->first, dyads, dyad_features(i->first, j->first, k)});
    }
  }
  return classes;
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd information;
};

Moments class_moments(const std::vector<DyadClass>& classes, const Eigen::VectorXd& theta) {
  const auto d = theta.size();
  Moments m{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (const auto& c : classes) {
    const double prob = logistic(c.features.dot(theta));
    m.mean += c.dyads * prob * c.features;
    m.information += c.dyads * prob * (1.0 - prob) * c.features * c.features.transpose();
  }
  return m;
}

void check_covariates(const DyadModel& model, const CovariateMatrix& z) {
  if (model.covariates.size() != z.cols() || model.match.size() != z.cols() ||
      model.activity.size() != z.cols()) {
    throw std::invalid_argument("model and covariate matrix have different covariate counts");
  }
}

}  // namespace

ModelStatistics expected_statistics(const DyadModel& model, const CovariateMatrix& z) {
  check_covariates(model, z);
  const auto classes = dyad_classes(nodes_by_pattern(z), z.cols());
  return ModelStatistics::from_vector(class_moments(classes, model.to_vector()).mean);
}

ModelStatistics observed_statistics(const Graph& g, const CovariateMatrix& z) {
  const auto k = z.cols();
  ModelStatistics s;
  s.edges = static_cast<double>(g.edge_count());
  s.match.assign(k, 0.0);
  s.ends.assign(k, 0.0);
  for (const auto& [u, v] : g.edges()) {
    for (std::size_t j = 0; j < k; ++j) {
      s.match[j] += z(u, j) == z(v, j) ? 1.0 : 0.0;
      s.ends[j] += z(u, j) + z(v, j);
    }
  }
  return s;
}

double CovariateTarget::resolved_r() const {
  if (homophily_r) return *homophily_r;
  if (homophily_h) return r_from_h(*homophily_h, p, diff_activity);
  throw DomainError(fmt::format("covariate '{}' needs homophily_r or homophily_h", name));
}

ModelStatistics target_statistics(std::span<const CovariateTarget> targets, double mean_degree,
                                  const CovariateMatrix& z) {
  if (targets.size() != z.cols()) throw std::invalid_argument("one target per covariate required");
  ModelStatistics s;
  s.edges = static_cast<double>(z.rows()) * mean_degree / 2.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    std::size_t ones = 0;
    for (std::size_t r = 0; r < z.rows(); ++r) ones += z(r, j);
    NetworkTargets t{z.rows(), static_cast<double>(ones) / static_cast<double>(z.rows()), mean_degree,
                     targets[j].diff_activity, targets[j].resolved_r()};
    try {
      const auto sol = solve_edge_targets(t);
      s.match.push_back(sol.e11 + sol.e00);
      s.ends.push_back(2.0 * sol.e11 + sol.e10);
    } catch (const std::exception& e) {
      throw InfeasibleTargets(fmt::format("covariate '{}': {}", targets[j].name, e.what()));
    }
  }
  return s;
}

double max_relative_residual(const ModelStatistics& achieved, const ModelStatistics& target) {
  const Eigen::VectorXd a = achieved.to_vector(), t = target.to_vector();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - t[i]) / std::max(std::abs(t[i]), 1.0));
  }
  return worst;
}

FitResult fit_theta(const ModelStatistics& target, const CovariateMatrix& z, std::size_t population,
                    double mean_degree, const FitOptions& opts) {
  if (target.match.size() != z.cols() || target.ends.size() != z.cols()) {
    throw std::invalid_argument("target statistics do not match covariate count");
  }
  if (population < 2 || !(mean_degree > 0.0 && mean_degree < static_cast<double>(population - 1))) {
    throw InfeasibleTargets(fmt::format("mean degree {} outside (0, {})", mean_degree, population - 1));
  }
  const auto classes = dyad_classes(nodes_by_pattern(z), z.cols());
  FitResult result;
  result.model = DyadModel::zeros(z.names());
  result.model.edges = logit(mean_degree / static_cast<double>(population - 1));
  result.target = target;

  const Eigen::VectorXd goal = target.to_vector();
  const Eigen::VectorXd scale = goal.cwiseAbs().cwiseMax(1.0);
  auto residual_of = [&](const Eigen::VectorXd& mean) {
    return ((mean - goal).cwiseQuotient(scale)).cwiseAbs().maxCoeff();
  };

  Eigen::VectorXd theta = result.model.to_vector();
  Moments m = class_moments(classes, theta);
  double residual = residual_of(m.mean);
  constexpr double kPolish = 1e-13;
  int it = 0;
  for (; it < opts.max_iterations && residual > kPolish; ++it) {
    Eigen::LDLT<Eigen::MatrixXd> solver(m.information);
    Eigen::VectorXd step = solver.solve(goal - m.mean);
    if (solver.info() != Eigen::Success || !step.allFinite()) break;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
      const Eigen::VectorXd candidate = theta + step;
      Moments next = class_moments(classes, candidate);
      const double r = residual_of(next.mean);
      if (r < residual) {
        theta = candidate;
        m = std::move(next);
        residual = r;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  result.model.assign(theta);
  result.achieved = ModelStatistics::from_vector(m.mean);
  result.max_relative_residual = residual;
  result.iterations = it;
  if (!(residual <= opts.tolerance)) {
    std::string detail;
    const Eigen::VectorXd rel = (m.mean - goal).cwiseQuotient(scale);
    for (Eigen::Index i = 0; i < rel.size(); ++i) detail += fmt::format(" {:.3e}", rel[i]);
    throw ConvergenceError(fmt::format("fit did not converge after {} iterations; relative residuals:{}",
                                       it, detail));
  }
  return result;
}

FitResult fit_theta(std::span<const CovariateTarget> targets, double mean_degree, const CovariateMatrix& z,
                    const FitOptions& opts) {
  return fit_theta(target_statistics(targets, mean_degree, z), z, z.rows(), mean_degree, opts);
}

Graph generate_from_model(const DyadModel& model, const CovariateMatrix& z, Rng& rng) {
  check_covariates(model, z);
  const auto groups = nodes_by_pattern(z);
  const Eigen::VectorXd theta = model.to_vector();
  std::vector<Edge> edges;
  for (auto i = groups.begin(); i != groups.end(); ++i) {
    for (auto j = i; j != groups.end(); ++j) {
      const double q = logistic(dyad_features(i->first, j->first, z.cols()).dot(theta));
      if (i == j) within_bernoulli(i->second, q, rng, edges);
      else between_bernoulli(i->second, j->second, q, rng, edges);
    }
  }
  return Graph(z.rows(), std::move(edges));
}

}  // namespace rdsim
