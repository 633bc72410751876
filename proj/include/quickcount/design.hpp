#pragma once

// Sample allocation with augmentation rules, and simulated error bounds
// of the seat estimates for candidate sample sizes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quickcount/apportionment.hpp"
#include "quickcount/bayes.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/quantile.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"

namespace quickcount {

/// Extra stations for strata whose state or time-zone offset matches.
struct AugmentationRule {
  enum class Match { state, tz_offset };
  Match match = Match::state;
  std::string state;
  int tz_offset = 0;
  std::size_t extra = 0;

  bool matches(const StationInfo& s) const {
    return match == Match::state ? s.state == state : s.tz_offset == tz_offset;
  }
};

/// +10 two hours behind, +5 one hour behind, +10 in Guerrero.
inline std::vector<AugmentationRule> default_rules() {
  return {{AugmentationRule::Match::tz_offset, "", -2, 10},
          {AugmentationRule::Match::tz_offset, "", -1, 5},
          {AugmentationRule::Match::state, "Guerrero", 0, 10}};
}

/// n_h = base + extras of every matching rule, capped at N_h. A stratum's
/// state and time zone are those of its first station.
inline std::vector<std::size_t> allocate_sample(const Frame& frame, std::size_t base,
                                                const std::vector<AugmentationRule>& rules) {
  if (base * frame.num_strata() > frame.population_size())
    throw DesignError("base allocation exceeds the population size");
  std::vector<std::size_t> n(frame.num_strata());
  for (std::size_t h = 0; h < frame.num_strata(); ++h) {
    const auto& first = frame.station(frame.stations_in(h).front());
    std::size_t size = base;
    for (const auto& r : rules)
      if (r.matches(first)) size += r.extra;
    n[h] = std::min(size, frame.population_size(h));
  }
  return n;
}

/// Marks a stratified random sample of the allocated sizes as planned.
inline std::vector<StationKey> draw_planned_sample(Frame& frame, const std::vector<std::size_t>& sizes,
                                                   std::uint64_t seed) {
  if (sizes.size() != frame.num_strata()) throw DesignError("one sample size per stratum required");
  std::vector<StationKey> keys;
  for (std::size_t h = 0; h < frame.num_strata(); ++h) {
    auto idx = frame.stations_in(h);
    if (sizes[h] > idx.size()) throw DesignError("n_h exceeds N_h in stratum " + std::to_string(frame.strata()[h]));
    auto rng = make_stream(seed, h);
    partial_shuffle(idx, sizes[h], rng);
    idx.resize(sizes[h]);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) keys.push_back(frame.station(i).key);
  }
  frame.set_planned_sample(keys);
  return keys;
}

enum class PointEstimator { frequentist, bayesian };

/// Point conformation from a complete sample: the expansion estimator, or
/// the posterior location T/v of every stratum proportion.
inline ChamberResult point_conformation(const Catalog& catalog, const Frame& frame,
                                        const std::vector<StationReturn>& sample, PointEstimator estimator) {
  if (estimator == PointEstimator::frequentist) {
    const auto groups = group_by_stratum(catalog, frame, sample);
    return compose_chamber(catalog, frame.strata(), estimate_totals(groups));
  }
  const auto stats = sufficient_stats(catalog, frame, sample);
  Table totals(stats.size(), catalog.num_forces());
  for (std::size_t h = 0; h < stats.size(); ++h) {
    if (!stats[h].has_data()) throw MissingStratumError("stratum " + std::to_string(stats[h].stratum) + " has no data");
    for (ForceIndex j = 0; j < catalog.num_forces(); ++j)
      totals(h, j) = frame.nominal_list(h) * std::clamp(stats[h].T[j] / stats[h].v, 0.0, 1.0);
  }
  return compose_from_forces(catalog, frame.strata(), totals);
}

/// Average and maximum absolute seat error over parties and independents.
inline std::pair<double, double> seat_errors(const Catalog& catalog, const ChamberComposition& truth,
                                             const ChamberComposition& estimate) {
  double sum = 0.0, worst = 0.0;
  std::size_t count = 0;
  for (ForceIndex f = 0; f < catalog.num_forces(); ++f) {
    if (!catalog.is_candidate(f)) continue;
    const double e = std::abs(truth.seats[f].total() - estimate.seats[f].total());
    sum += e;
    worst = std::max(worst, e);
    ++count;
  }
  return {count ? sum / static_cast<double>(count) : 0.0, worst};
}

struct ErrorBound {
  std::size_t n = 0;    // requested total sample size
  std::size_t n_h = 0;  // per-stratum size used
  double eps1 = 0.0;    // bound on the average error
  double eps2 = 0.0;    // bound on the maximum error
  double level = 0.95;
  std::size_t reps = 0;
  std::size_t failed = 0;  // replicates where the seat rules had no solution
  bool skipped = false;
  std::string note;
};

struct ErrorBoundOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double level = 0.95;
  PointEstimator estimator = PointEstimator::frequentist;
};

/// For each total size n (n_h = n / L in every stratum) draws `reps`
/// stratified samples from the population, computes the point conformation
/// and reports the `level` quantiles of the average and maximum seat errors.
inline std::vector<ErrorBound> simulate_error_bounds(const Catalog& catalog, const Frame& frame,
                                                     const std::vector<StationReturn>& population,
                                                     const std::vector<std::size_t>& sizes,
                                                     const ErrorBoundOptions& opt) {
  if (opt.reps == 0) throw InputError("error-bound simulation needs at least one repetition");
  const auto truth = compose_chamber(catalog, frame.strata(), population_totals(catalog, frame, population)).chamber;
  std::size_t min_stratum = frame.population_size();
  for (std::size_t h = 0; h < frame.num_strata(); ++h) min_stratum = std::min(min_stratum, frame.population_size(h));

  std::vector<ErrorBound> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    ErrorBound b;
    b.n = sizes[i];
    b.n_h = sizes[i] / frame.num_strata();
    b.level = opt.level;
    if (b.n_h < 1 || b.n_h > min_stratum) {
      b.skipped = true;
      b.note = "n_h = " + std::to_string(b.n_h) + " outside [1, " + std::to_string(min_stratum) + "]";
      out.push_back(b);
      continue;
    }
    const std::vector<std::size_t> alloc(frame.num_strata(), b.n_h);
    std::vector<double> e1(opt.reps), e2(opt.reps);
    std::vector<char> ok(opt.reps, 1);
    parallel_for(opt.reps, opt.workers, [&](std::size_t r) {
      const auto sample = draw_sample(frame, population, alloc, derive_seed(opt.seed, i, r));
      try {
        const auto est = point_conformation(catalog, frame, sample, opt.estimator);
        std::tie(e1[r], e2[r]) = seat_errors(catalog, truth, est.chamber);
      } catch (const EstimationError&) {
        ok[r] = 0;
      }
    });
    std::vector<double> a, m;
    for (std::size_t r = 0; r < opt.reps; ++r)
      if (ok[r]) {
        a.push_back(e1[r]);
        m.push_back(e2[r]);
      }
    b.reps = a.size();
    b.failed = opt.reps - a.size();
    if (a.empty()) {
      b.skipped = true;
      b.note = "no replicate produced a valid chamber";
    } else {
      std::sort(a.begin(), a.end());
      std::sort(m.begin(), m.end());
      b.eps1 = nearest_rank(a, opt.level);
      b.eps2 = nearest_rank(m, opt.level);
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace quickcount
