#include "rdsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"

namespace rdsim {

// ---------------------------------------------------------------------------
// Plans

ExperimentPlan ExperimentPlan::faithful() { return ExperimentPlan{}; }

ExperimentPlan ExperimentPlan::desk() {
  ExperimentPlan plan;
  plan.mean_degree = 20.0;
  plan.replicates = 100;
  return plan;
}

void ExperimentPlan::validate() const {
  if (replicates < 1) throw DomainError("replicates must be at least 1");
  if (prevalences.empty() || diff_activities.empty() || homophily_rs.empty() || sample_sizes.empty()) {
    throw DomainError("every grid axis needs at least one value");
  }
  if (threads < 1) throw DomainError("threads must be at least 1");
  for (auto n : sample_sizes) {
    SamplerConfig{seeds, coupons, n, seed_selection, reseed_on_death}.validate(population);
  }
}

std::string to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::skipped: return "skip";
    case RecordStatus::error: return "error";
  }
  return "?";
}

const std::vector<std::string>& estimand_names() {
  static const std::vector<std::string> names{"d_a", "h", "r", "h_induced", "p_rds2"};
  return names;
}

namespace {

std::optional<double> Estimates::*estimand_member(std::size_t i) {
  static constexpr std::optional<double> Estimates::*members[] = {
      &Estimates::d_a, &Estimates::h, &Estimates::r, &Estimates::h_induced, &Estimates::p_rds2};
  return members[i];
}

template <class F>
std::optional<double> defined(F f) {
  try {
    return f();
  } catch (const UndefinedEstimand&) {
    return std::nullopt;
  }
}

// Estimates for one attribute of a forest, plus their biases against truth.
void fill_estimates(ReplicateRecord& rec, const RecruitmentForest& forest, const Graph& g, std::size_t attr) {
  rec.estimate.d_a = estimate_da(forest, attr);
  const auto tree = estimate_homophily(forest, attr);
  rec.estimate.h = tree.h;
  rec.estimate.r = tree.r;
  rec.estimate.h_induced = induced_homophily(forest, g, attr).h;
  try {
    rec.estimate.p_rds2 = rds2_prevalence(forest, attr);
  } catch (const std::invalid_argument&) {
    rec.estimate.p_rds2 = std::nullopt;
  }
  rec.estimate.p_crude = crude_prevalence(forest, attr);

  rec.bias.d_a = relative_bias(rec.estimate.d_a, rec.truth.d_a);
  rec.bias.h = relative_bias(rec.estimate.h, rec.truth.h);
  rec.bias.r = relative_bias(rec.estimate.r, rec.truth.r);
  rec.bias.h_induced = relative_bias(rec.estimate.h_induced, rec.truth.h);
  rec.bias.p_rds2 = relative_bias(rec.estimate.p_rds2, rec.truth.p);

  rec.reseeds = forest.reseeds;
  rec.max_wave = forest.max_wave();
  rec.sampled = forest.size();
  rec.truncated = forest.truncated;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

Truth realized_truth(const Graph& g, const AttributeVector& z) {
  Truth t;
  t.p = prevalence(z);
  t.mean_degree = mean_degree(g);
  t.d_a = defined([&] { return differential_activity(g, z); });
  const auto m = mixing_counts(g, z);
  t.r = defined([&] { return homophily_r(m); });
  t.h = defined([&] { return homophily_newman(m); });
  return t;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<BiasSummaryRow> summarize(const std::vector<ReplicateRecord>& records) {
  struct Group {
    const ReplicateRecord* first;
    std::vector<const ReplicateRecord*> members;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.cell, r.attribute, r.sample_size);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({&r, {}});
    groups[it->second].members.push_back(&r);
  }

  std::vector<BiasSummaryRow> out;
  for (const auto& g : groups) {
    for (std::size_t e = 0; e < estimand_names().size(); ++e) {
      BiasSummaryRow row;
      row.cell = g.first->cell;
      row.attribute = g.first->attribute;
      row.target_p = g.first->target_p;
      row.target_da = g.first->target_da;
      row.target_r = g.first->target_r;
      row.target_h = g.first->target_h;
      row.sample_size = g.first->sample_size;
      row.estimand = estimand_names()[e];
      row.replicates = g.members.size();
      std::vector<double> values;
      for (const auto* rec : g.members) {
        if (rec->status != RecordStatus::ok) {
          ++row.skipped;
          continue;
        }
        const auto& v = rec->bias.*estimand_member(e);
        if (v) values.push_back(*v);
        else ++row.undefined;
      }
      row.count = values.size();
      if (!values.empty()) {
        std::sort(values.begin(), values.end());
        row.min = values.front();
        row.max = values.back();
        row.q1 = quantile(values, 0.25);
        row.median = quantile(values, 0.5);
        row.q3 = quantile(values, 0.75);
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean = sum / static_cast<double>(values.size());
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Grid experiment

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();

  struct NetCell {
    NetworkTargets targets;
    std::string id;
    std::string skip_reason;
  };
  std::vector<NetCell> cells;
  for (double p : plan.prevalences) {
    for (double da : plan.diff_activities) {
      for (double r : plan.homophily_rs) {
        NetCell c{{plan.population, p, plan.mean_degree, da, r}, fmt::format("p={}/da={}/r={}", p, da, r), {}};
        try {
          solve_edge_targets(c.targets);
        } catch (const std::exception& e) {
          c.skip_reason = e.what();
        }
        cells.push_back(std::move(c));
      }
    }
  }

  const std::size_t reps = plan.replicates;
  const std::size_t sizes = plan.sample_sizes.size();
  ExperimentResult result;
  result.records.resize(cells.size() * sizes * reps);
  for (const auto& c : cells) {
    if (!c.skip_reason.empty()) result.skipped_cells.push_back(c.id + ": " + c.skip_reason);
  }

  std::vector<std::optional<Population>> fixed(cells.size());
  if (plan.fixed_network) {
    parallel_for(cells.size(), plan.threads, [&](std::size_t ci) {
      if (!cells[ci].skip_reason.empty()) return;
      Rng rng(derive_seed(plan.master_seed, "net/" + cells[ci].id, 0));
      fixed[ci] = generate_network(cells[ci].targets, rng, plan.mode);
    });
  }

  parallel_for(cells.size() * reps, plan.threads, [&](std::size_t task) {
    const std::size_t ci = task / reps, rep = task % reps;
    const auto& cell = cells[ci];
    auto slot = [&](std::size_t ni) -> ReplicateRecord& {
      return result.records[(ci * sizes + ni) * reps + rep];
    };
    for (std::size_t ni = 0; ni < sizes; ++ni) {
      auto& rec = slot(ni);
      rec.cell = fmt::format("{}/n={}", cell.id, plan.sample_sizes[ni]);
      rec.attribute = "z";
      rec.target_p = cell.targets.p;
      rec.target_da = cell.targets.diff_activity;
      rec.target_r = cell.targets.homophily_r;
      rec.sample_size = plan.sample_sizes[ni];
      rec.replicate = rep;
      if (!cell.skip_reason.empty()) {
        rec.status = RecordStatus::skipped;
        rec.reason = sanitize(cell.skip_reason);
      }
    }
    if (!cell.skip_reason.empty()) return;

    std::size_t ni = 0;
    try {
      std::optional<Population> own;
      if (!plan.fixed_network) {
        Rng rng(derive_seed(plan.master_seed, "net/" + cell.id, rep));
        own = generate_network(cell.targets, rng, plan.mode);
      }
      const Population& pop = plan.fixed_network ? *fixed[ci] : *own;
      const Truth truth = realized_truth(pop.graph, pop.z);
      const AttributeVector attrs[] = {pop.z};
      for (; ni < sizes; ++ni) {
        auto& rec = slot(ni);
        rec.truth = truth;
        SamplerConfig cfg{plan.seeds, plan.coupons, plan.sample_sizes[ni], plan.seed_selection,
                          plan.reseed_on_death};
        Rng rng(derive_seed(plan.master_seed, rec.cell, rep));
        const auto forest = run_rds(pop.graph, attrs, cfg, rng);
        fill_estimates(rec, forest, pop.graph, 0);
      }
    } catch (const std::exception& e) {
      for (; ni < sizes; ++ni) {
        slot(ni).status = RecordStatus::error;
        slot(ni).reason = sanitize(e.what());
      }
    }
  });

  for (const auto& r : result.records) result.any_error |= r.status == RecordStatus::error;
  result.summary = summarize(result.records);
  return result;
}

// ---------------------------------------------------------------------------
// Engage-style multi-covariate scenario

EngageScenario EngageScenario::full() {
  EngageScenario s;
  // Population prevalences are the inverse-degree weighted estimates; h and
  // Da are the sample values per covariate.
  s.covariates = {
      {"CAS", 0.579, 1.18, std::nullopt, 0.17},
      {"CIR", 0.439, 0.95, std::nullopt, 0.09},
      {"HIV+", 0.127, 1.32, std::nullopt, 0.38},
  };
  s.correlations.resize(3, 3);
  s.correlations << 1.0, 0.104, 0.023,  //
      0.104, 1.0, 0.046,                //
      0.023, 0.046, 1.0;
  return s;
}

EngageScenario EngageScenario::scaled(std::size_t new_population, std::size_t new_replicates) const {
  EngageScenario s = *this;
  const double fraction = static_cast<double>(sampler.target_sample_size) / static_cast<double>(population);
  s.population = new_population;
  s.sampler.target_sample_size =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(new_population)));
  s.replicates = new_replicates;
  return s;
}

CovariateSpec EngageScenario::covariate_spec() const {
  CovariateSpec spec;
  for (const auto& c : covariates) {
    spec.names.push_back(c.name);
    spec.marginals.push_back(c.p);
  }
  spec.correlations = correlations;
  return spec;
}

void EngageScenario::validate() const {
  if (covariates.empty()) throw DomainError("engage scenario needs at least one covariate");
  if (replicates < 1) throw DomainError("replicates must be at least 1");
  if (threads < 1) throw DomainError("threads must be at least 1");
  covariate_spec().validate();
  sampler.validate(population);
  for (const auto& c : covariates) c.resolved_r();
}

ExperimentResult run_engage_mimic(const EngageScenario& sc) {
  sc.validate();
  const auto spec = sc.covariate_spec();
  const std::size_t k = sc.covariates.size();
  const std::size_t reps = sc.replicates;
  const std::string cell = fmt::format("engage/N={}/n={}", sc.population, sc.sampler.target_sample_size);

  ExperimentResult result;
  result.records.resize(k * reps);
  parallel_for(reps, sc.threads, [&](std::size_t rep) {
    for (std::size_t j = 0; j < k; ++j) {
      auto& rec = result.records[j * reps + rep];
      rec.cell = cell;
      rec.attribute = sc.covariates[j].name;
      rec.target_p = sc.covariates[j].p;
      rec.target_da = sc.covariates[j].diff_activity;
      rec.target_r = sc.covariates[j].homophily_r;
      rec.target_h = sc.covariates[j].homophily_h;
      rec.sample_size = sc.sampler.target_sample_size;
      rec.replicate = rep;
    }
    auto mark_all = [&](RecordStatus status, const std::string& why) {
      for (std::size_t j = 0; j < k; ++j) {
        result.records[j * reps + rep].status = status;
        result.records[j * reps + rep].reason = sanitize(why);
      }
    };
    Rng rng(derive_seed(sc.master_seed, cell, rep));
    try {
      const auto z = generate_binary_covariates(spec, sc.population, rng);
      FitResult fit;
      try {
        fit = fit_theta(sc.covariates, sc.mean_degree, z);
      } catch (const ConvergenceError& e) {
        mark_all(RecordStatus::skipped, e.what());
        return;
      } catch (const InfeasibleTargets& e) {
        mark_all(RecordStatus::skipped, e.what());
        return;
      }
      const Graph g = generate_from_model(fit.model, z, rng);
      const auto attrs = z.columns();
      const auto forest = run_rds(g, attrs, sc.sampler, rng);
      for (std::size_t j = 0; j < k; ++j) {
        auto& rec = result.records[j * reps + rep];
        rec.truth = realized_truth(g, attrs[j]);
        fill_estimates(rec, forest, g, j);
      }
    } catch (const std::exception& e) {
      mark_all(RecordStatus::error, e.what());
    }
  });

  for (const auto& r : result.records) result.any_error |= r.status == RecordStatus::error;
  result.summary = summarize(result.records);
  return result;
}

// ---------------------------------------------------------------------------
// CSV

std::string replicates_csv(const std::vector<ReplicateRecord>& records) {
  using csv::number;
  std::string out =
      "cell,attribute,target_p,target_da,target_r,target_h,sample_size,replicate,status,reason,"
      "true_p,true_mean_degree,true_da,true_r,true_h,"
      "est_da,est_h,est_r,est_h_induced,est_p_rds2,est_p_crude,"
      "rb_da,rb_h,rb_r,rb_h_induced,rb_p_rds2,reseeds,max_wave,sampled,truncated\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},", r.cell, r.attribute, number(r.target_p),
                       number(r.target_da), number(r.target_r), number(r.target_h), r.sample_size,
                       r.replicate, to_string(r.status), r.reason);
    out += fmt::format("{},{},{},{},{},", number(r.truth.p), number(r.truth.mean_degree), number(r.truth.d_a),
                       number(r.truth.r), number(r.truth.h));
    out += fmt::format("{},{},{},{},{},{},", number(r.estimate.d_a), number(r.estimate.h), number(r.estimate.r),
                       number(r.estimate.h_induced), number(r.estimate.p_rds2), number(r.estimate.p_crude));
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", number(r.bias.d_a), number(r.bias.h), number(r.bias.r),
                       number(r.bias.h_induced), number(r.bias.p_rds2), r.reseeds, r.max_wave, r.sampled,
                       r.truncated ? 1 : 0);
  }
  return out;
}

std::string summary_csv(const std::vector<BiasSummaryRow>& rows) {
  using csv::number;
  std::string out =
      "cell,attribute,target_p,target_da,target_r,target_h,sample_size,estimand,replicates,count,undefined,"
      "skipped,undefined_rate,min,q1,median,q3,max,mean\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},", r.cell, r.attribute, number(r.target_p),
                       number(r.target_da), number(r.target_r), number(r.target_h), r.sample_size, r.estimand,
                       r.replicates, r.count, r.undefined, r.skipped, number(r.undefined_rate()));
    out += fmt::format("{},{},{},{},{},{}\n", number(r.min), number(r.q1), number(r.median), number(r.q3),
                       number(r.max), number(r.mean));
  }
  return out;
}

}  // namespace rdsim
