#include "rdsim/estimators.hpp"

#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

HomophilyEstimate homophily_of(const MixingCounts& m) {
  HomophilyEstimate out;
  try {
    out.h = homophily_newman(m);
  } catch (const UndefinedEstimand&) {
  }
  try {
    out.r = homophily_r(m);
  } catch (const UndefinedEstimand&) {
  }
  return out;
}

}  // namespace

std::optional<double> estimate_da(const RecruitmentForest& f, std::size_t attr) {
  std::size_t n1 = 0, n0 = 0;
  double deg1 = 0.0, deg0 = 0.0;
  for (const auto& e : f.entries) {
    if (e.attributes.at(attr)) {
      ++n1;
      deg1 += static_cast<double>(e.reported_degree);
    } else {
      ++n0;
      deg0 += static_cast<double>(e.reported_degree);
    }
  }
  if (n1 == 0 || n0 == 0 || deg0 == 0.0) return std::nullopt;
  return (deg1 / static_cast<double>(n1)) / (deg0 / static_cast<double>(n0));
}

MixingCounts recruitment_mixing(const RecruitmentForest& f, std::size_t attr) {
  std::unordered_map<node_t, std::uint8_t> value;
  value.reserve(f.entries.size());
  for (const auto& e : f.entries) value[e.node] = e.attributes.at(attr);
  MixingCounts m;
  for (const auto& [recruiter, recruit] : f.recruitment_edges) {
    m.add(value.at(recruiter), value.at(recruit));
  }
  return m;
}

HomophilyEstimate estimate_homophily(const RecruitmentForest& f, std::size_t attr) {
  return homophily_of(recruitment_mixing(f, attr));
}

HomophilyEstimate induced_homophily(const RecruitmentForest& f, const Graph& g, std::size_t attr) {
  std::vector<int> value(g.node_count(), -1);
  for (const auto& e : f.entries) value.at(e.node) = e.attributes.at(attr);
  MixingCounts m;
  for (const auto& e : f.entries) {
    for (node_t w : g.neighbors(e.node)) {
      if (w > e.node && value[w] >= 0) {
        m.add(static_cast<std::uint8_t>(value[e.node]), static_cast<std::uint8_t>(value[w]));
      }
    }
  }
  return homophily_of(m);
}

std::optional<double> rds2_prevalence(const RecruitmentForest& f, std::size_t attr) {
  double num = 0.0, den = 0.0;
  for (const auto& e : f.entries) {
    if (e.reported_degree == 0) {
      throw std::invalid_argument(fmt::format("node {} has reported degree 0", e.node));
    }
    const double w = 1.0 / static_cast<double>(e.reported_degree);
    den += w;
    if (e.attributes.at(attr)) num += w;
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

double crude_prevalence(const RecruitmentForest& f, std::size_t attr) {
  if (f.entries.empty()) return 0.0;
  std::size_t ones = 0;
  for (const auto& e : f.entries) ones += e.attributes.at(attr);
  return static_cast<double>(ones) / static_cast<double>(f.entries.size());
}

SampleEstimates estimate_all(const RecruitmentForest& f) {
  SampleEstimates out;
  out.sample_size = f.size();
  out.max_wave = f.max_wave();
  for (std::size_t a = 0; a < f.attribute_names.size(); ++a) {
    AttributeEstimates est;
    est.name = f.attribute_names[a];
    est.d_a = estimate_da(f, a);
    const auto hom = estimate_homophily(f, a);
    est.h = hom.h;
    est.r = hom.r;
    try {
      est.rds2_prevalence = rds2_prevalence(f, a);
    } catch (const std::invalid_argument&) {
    }
    est.crude_prevalence = crude_prevalence(f, a);
    out.attributes.push_back(std::move(est));
  }
  return out;
}

std::optional<double> relative_bias(std::optional<double> estimate, std::optional<double> truth) {
  if (!estimate || !truth || *truth == 0.0) return std::nullopt;
  return (*estimate - *truth) / *truth;
}

std::string estimates_csv_header() {
  return "forest,attribute,sample_size,max_wave,d_a_hat,h_hat,r_hat,rds2_prevalence,crude_prevalence\n";
}

std::string estimates_csv_rows(const std::string& forest_id, const SampleEstimates& e) {
  std::string out;
  for (const auto& a : e.attributes) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", forest_id, a.name, e.sample_size, e.max_wave,
                       csv::number(a.d_a), csv::number(a.h), csv::number(a.r),
                       csv::number(a.rds2_prevalence), csv::number(a.crude_prevalence));
  }
  return out;
}

}  // namespace rdsim
