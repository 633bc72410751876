#pragma once

// Multiple imputation of missing station returns by chained predictive mean
// matching, bootstrap on every completed dataset, and Rubin pooling.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "quickcount/bootstrap.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/quantile.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"
#include "quickcount/summary.hpp"

namespace quickcount {

struct MiConfig {
  std::size_t m = 15;
  std::size_t iterations = 5;
  std::size_t donors = 5;
  /// Forces whose single-option columns predict every other column; empty
  /// means the catalog's list, or else the four parties with most votes.
  std::vector<ForceIndex> predictors;
};

/// Planned sample as a station x ballot-option matrix with missing cells.
struct ImputationData {
  std::vector<StationKey> keys;
  std::vector<int> nominal;
  Table values;                // stations x ballot options; missing cells hold 0
  std::vector<char> missing;   // same shape, 1 = missing
  std::vector<std::string> warnings;

  std::size_t rows() const { return keys.size(); }
  std::size_t cols() const { return values.cols(); }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols() + c] != 0; }
  std::size_t missing_cells() const { return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), 1)); }
};

/// Rows are the frame's planned sample (stations flagged in_sample) plus any
/// received station outside it; stations not yet received are fully missing.
inline ImputationData build_imputation_data(const Catalog& catalog, const Frame& frame,
                                            const std::vector<StationReturn>& received) {
  const std::size_t C = catalog.num_ballot_options();
  std::map<StationKey, const StationReturn*> by_key;
  for (const auto& r : received) {
    if (r.votes.size() != C) throw InputError("station " + to_string(r.key) + " has the wrong number of vote cells");
    if (!frame.find(r.key)) throw InputError("station " + to_string(r.key) + " is not in the frame");
    if (!by_key.emplace(r.key, &r).second) throw InputError("station " + to_string(r.key) + " received twice");
  }
  ImputationData d;
  std::size_t outside = 0;
  for (const auto& s : frame.stations()) {
    const bool got = by_key.count(s.key) > 0;
    if (!s.in_sample && !got) continue;
    if (!s.in_sample) ++outside;
    d.keys.push_back(s.key);
  }
  if (frame.planned_size() == 0)
    d.warnings.push_back("frame has no planned sample; only received stations are used");
  else if (outside > 0)
    d.warnings.push_back(std::to_string(outside) + " received stations are outside the planned sample");

  d.values = Table(d.keys.size(), C);
  d.missing.assign(d.keys.size() * C, 1);
  for (std::size_t i = 0; i < d.keys.size(); ++i) {
    const auto it = by_key.find(d.keys[i]);
    if (it == by_key.end()) {
      d.nominal.push_back(frame.station(*frame.find(d.keys[i])).nominal_list);
      continue;
    }
    const auto& r = *it->second;
    d.nominal.push_back(r.nominal_list);
    for (std::size_t c = 0; c < C; ++c) {
      if (!r.votes[c]) continue;
      if (*r.votes[c] < 0) throw InputError("station " + to_string(r.key) + " has a negative vote count");
      d.values(i, c) = static_cast<double>(*r.votes[c]);
      d.missing[i * C + c] = 0;
    }
  }
  return d;
}

/// Ballot-option columns used as predictors.
inline std::vector<std::size_t> predictor_columns(const Catalog& catalog, const ImputationData& data,
                                                  const std::vector<ForceIndex>& requested) {
  std::vector<ForceIndex> forces = requested.empty() ? catalog.mi_predictors() : requested;
  if (forces.empty()) {
    std::vector<std::pair<double, ForceIndex>> totals;
    for (ForceIndex f = 0; f < catalog.num_forces(); ++f) {
      if (!catalog.is_party(f) || !catalog.single_option(f)) continue;
      const std::size_t c = *catalog.single_option(f);
      double sum = 0.0;
      for (std::size_t r = 0; r < data.rows(); ++r)
        if (!data.is_missing(r, c)) sum += data.values(r, c);
      totals.push_back({-sum, f});
    }
    std::sort(totals.begin(), totals.end());
    for (std::size_t i = 0; i < totals.size() && i < 4; ++i) forces.push_back(totals[i].second);
    std::sort(forces.begin(), forces.end());
  }
  std::vector<std::size_t> cols;
  for (ForceIndex f : forces) {
    const auto o = catalog.single_option(f);
    if (!o) throw InputError("predictor force " + catalog.force(f).id + " has no ballot option");
    cols.push_back(*o);
  }
  return cols;
}

/// Positions (into `observed`) of the k observed predictions nearest to
/// `target`. `order` lists observed positions sorted by prediction. Equal
/// distances prefer the smaller prediction.
inline std::vector<std::size_t> nearest_donors(std::span<const double> observed, std::span<const std::size_t> order,
                                               double target, std::size_t k) {
  std::vector<std::size_t> out;
  k = std::min(k, order.size());
  auto it = std::lower_bound(order.begin(), order.end(), target,
                             [&](std::size_t i, double t) { return observed[i] < t; });
  std::ptrdiff_t right = it - order.begin();
  std::ptrdiff_t left = right - 1;
  const auto n = static_cast<std::ptrdiff_t>(order.size());
  while (out.size() < k) {
    const bool has_left = left >= 0;
    const bool has_right = right < n;
    if (has_left && (!has_right || target - observed[order[static_cast<std::size_t>(left)]] <=
                                       observed[order[static_cast<std::size_t>(right)]] - target)) {
      out.push_back(order[static_cast<std::size_t>(left--)]);
    } else {
      out.push_back(order[static_cast<std::size_t>(right++)]);
    }
  }
  return out;
}

/// Predictive mean matching for one column. X holds the predictors of every
/// row (intercept included). Coefficients are drawn from the normal-linear
/// posterior under a flat prior: sigma^2 = SSR / chi^2_{n-p}, then
/// beta* ~ N(beta_hat, sigma^2 (X'X)^-1); predictions for all rows use beta*.
/// Each missing cell copies the observed value of one of its `donors`
/// nearest rows, chosen uniformly.
inline void pmm_impute_column(const Eigen::MatrixXd& X, std::vector<double>& y, const std::vector<char>& missing,
                              std::size_t donors, Rng& rng, std::vector<std::string>* warnings = nullptr) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<Eigen::Index>(X.cols());
  std::vector<std::size_t> obs, mis;
  for (std::size_t r = 0; r < n; ++r) (missing[r] ? mis : obs).push_back(r);
  if (mis.empty()) return;
  if (obs.empty()) throw EstimationError("column has no observed values to match");
  if (obs.size() < donors && warnings)
    warnings->push_back("only " + std::to_string(obs.size()) + " observed rows; donor pool shrunk");

  Eigen::MatrixXd Xo(static_cast<Eigen::Index>(obs.size()), p);
  Eigen::VectorXd yo(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    Xo.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(obs[i]));
    yo(static_cast<Eigen::Index>(i)) = y[obs[i]];
  }
  Eigen::MatrixXd xtx = Xo.transpose() * Xo;
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  const double tiny = 1e-10 * std::sqrt(std::max(xtx.diagonal().maxCoeff(), 1.0));
  auto usable = [&] { return llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > tiny; };
  // rank-deficient design: ridge penalty of 1e-5 times the diagonal, grown until usable
  for (double scale = 1e-5; !usable(); scale *= 10.0) {
    if (scale > 1e3) throw EstimationError("regression for imputation is singular");
    Eigen::MatrixXd ridge = xtx;
    for (Eigen::Index i = 0; i < p; ++i) ridge(i, i) += scale * std::max(xtx(i, i), 1.0);
    llt.compute(ridge);
  }
  const Eigen::VectorXd beta_hat = llt.solve(Xo.transpose() * yo);
  const Eigen::VectorXd resid = yo - Xo * beta_hat;
  const double ssr = resid.squaredNorm();
  const double dof = std::max<double>(1.0, static_cast<double>(obs.size()) - static_cast<double>(p));
  std::chi_squared_distribution<double> chi(dof);
  std::normal_distribution<double> norm(0.0, 1.0);
  const double sigma = std::sqrt(ssr / std::max(chi(rng), 1e-300));
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = norm(rng);
  // (X'X)^-1 = L^-T L^-1, so L^-T z has the right covariance
  const Eigen::VectorXd beta = beta_hat + sigma * llt.matrixU().solve(z);

  const Eigen::VectorXd pred = X * beta;
  std::vector<double> obs_pred(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) obs_pred[i] = pred(static_cast<Eigen::Index>(obs[i]));
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return obs_pred[a] < obs_pred[b]; });
  const std::size_t k = std::max<std::size_t>(1, std::min(donors, obs.size()));
  for (std::size_t r : mis) {
    const auto pool = nearest_donors(obs_pred, order, pred(static_cast<Eigen::Index>(r)), k);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    y[r] = y[obs[pool[pick(rng)]]];
  }
}

/// One chain of chained-equation imputation: mean start, then `iterations`
/// left-to-right sweeps over the columns with missing cells. Columns with no
/// observed value are filled with zeros.
inline Table chained_impute(const ImputationData& data, const std::vector<std::size_t>& predictor_cols,
                            const MiConfig& cfg, Rng& rng, std::vector<std::string>* warnings = nullptr) {
  if (cfg.iterations == 0) throw InputError("imputation needs at least one iteration");
  const std::size_t R = data.rows(), C = data.cols();
  Table cur = data.values;
  std::vector<bool> active(C, false), empty(C, false);
  for (std::size_t c = 0; c < C; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < R; ++r)
      if (!data.is_missing(r, c)) {
        sum += data.values(r, c);
        ++n;
      }
    if (n == R) continue;
    if (n == 0) {
      empty[c] = true;
      if (warnings) warnings->push_back("ballot option " + std::to_string(c) + " has no observed values; filled with zeros");
      for (std::size_t r = 0; r < R; ++r) cur(r, c) = 0.0;
      continue;
    }
    active[c] = true;
    for (std::size_t r = 0; r < R; ++r)
      if (data.is_missing(r, c)) cur(r, c) = sum / static_cast<double>(n);
  }

  std::vector<double> y(R);
  std::vector<char> miss(R);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t c = 0; c < C; ++c) {
      if (!active[c]) continue;
      std::vector<std::size_t> preds;
      for (std::size_t pc : predictor_cols)
        if (pc != c) preds.push_back(pc);
      Eigen::MatrixXd X(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(preds.size() + 2));
      for (std::size_t r = 0; r < R; ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        X(i, 0) = 1.0;
        X(i, 1) = data.nominal[r];
        for (std::size_t k = 0; k < preds.size(); ++k) X(i, static_cast<Eigen::Index>(k + 2)) = cur(r, preds[k]);
        y[r] = cur(r, c);
        miss[r] = data.is_missing(r, c) ? 1 : 0;
      }
      pmm_impute_column(X, y, miss, cfg.donors, rng, it == 0 ? warnings : nullptr);
      for (std::size_t r = 0; r < R; ++r) cur(r, c) = y[r];
    }
  }
  return cur;
}

/// Completed dataset as station returns.
inline std::vector<StationReturn> completed_returns(const ImputationData& data, const Table& values) {
  std::vector<StationReturn> out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out[r].key = data.keys[r];
    out[r].nominal_list = data.nominal[r];
    out[r].votes.resize(data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c) out[r].votes[c] = static_cast<std::int64_t>(std::llround(values(r, c)));
  }
  return out;
}

struct PooledEstimate {
  ForceIndex force = 0;
  std::size_t m = 0;
  double q_bar = 0.0;
  double w_bar = 0.0;
  double b_var = 0.0;
  double t_var = 0.0;
  double df = std::numeric_limits<double>::infinity();
  Interval<double> interval;
  Interval<int> seats;
};

/// Rubin's rules. B_var = 0 uses the normal quantile (infinite df). Seat
/// bounds are rounded outward and clamped to [0, max_seats].
inline PooledEstimate rubin_pool(const std::vector<double>& q, const std::vector<double>& u, double level,
                                 int max_seats) {
  if (q.empty() || q.size() != u.size()) throw InputError("pooling needs matching point and variance estimates");
  if (!(level > 0.0 && level < 1.0)) throw InputError("pooling level must lie in (0, 1)");
  for (double x : u)
    if (!(x >= 0.0)) throw InputError("within-imputation variance must be non-negative");
  PooledEstimate e;
  const double m = static_cast<double>(q.size());
  e.m = q.size();
  e.q_bar = sample_mean(q);
  e.w_bar = sample_mean(u);
  e.b_var = sample_variance(q);
  e.t_var = e.w_bar + (1.0 + 1.0 / m) * e.b_var;
  const double p = 0.5 * (1.0 + level);
  double crit;
  if (e.b_var > 0.0 && q.size() > 1) {
    const double r = e.w_bar / ((1.0 + 1.0 / m) * e.b_var);
    e.df = (m - 1.0) * (1.0 + r) * (1.0 + r);
    crit = boost::math::quantile(boost::math::students_t(e.df), p);
  } else {
    e.df = std::numeric_limits<double>::infinity();
    crit = boost::math::quantile(boost::math::normal(), p);
  }
  const double half = crit * std::sqrt(e.t_var);
  e.interval = {e.q_bar - half, e.q_bar + half};
  // the tiny guard keeps exact integers from rounding outward by one
  e.seats = {std::clamp(static_cast<int>(std::floor(e.interval.lower + 1e-9)), 0, max_seats),
             std::clamp(static_cast<int>(std::ceil(e.interval.upper - 1e-9)), 0, max_seats)};
  return e;
}

struct MiOptions {
  MiConfig config;
  std::size_t replicates = 300;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double level = 0.95;
};

struct MiResult {
  std::vector<PooledEstimate> estimates;  // one per party / independent
  std::vector<ChamberRun> runs;           // bootstrap run of each completed dataset
  std::vector<std::string> warnings;
  std::size_t rows = 0;
  std::size_t missing_rows = 0;
  std::size_t missing_cells = 0;

  /// Seat-holder probabilities pooled over every dataset and replicate.
  Table winner_probabilities(std::size_t num_forces) const {
    std::vector<std::vector<ForceIndex>> all;
    for (const auto& run : runs) all.insert(all.end(), run.seat_holders.begin(), run.seat_holders.end());
    return quickcount::winner_probabilities(num_forces, all);
  }
};

/// Seed of the imputation chain and of the bootstrap run for dataset i.
inline std::uint64_t mi_chain_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, i, 1); }
inline std::uint64_t mi_bootstrap_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, i, 2); }

/// m completed datasets, a bootstrap of each, and Rubin pooling of the
/// per-party seat counts (q_i = replicate mean, u_i = replicate variance).
inline MiResult mi_chamber(const Catalog& catalog, const Frame& frame, const std::vector<StationReturn>& received,
                           const MiOptions& opt) {
  if (opt.config.m == 0) throw InputError("multiple imputation needs at least one dataset");
  MiResult res;
  auto data = build_imputation_data(catalog, frame, received);
  res.warnings = data.warnings;
  res.rows = data.rows();
  res.missing_cells = data.missing_cells();
  for (std::size_t r = 0; r < data.rows(); ++r) {
    bool all = true;
    for (std::size_t c = 0; c < data.cols(); ++c) all = all && data.is_missing(r, c);
    res.missing_rows += all ? 1 : 0;
  }
  const std::size_t complete_rows = res.rows - res.missing_rows;
  if (complete_rows < frame.num_strata())
    res.warnings.push_back("only " + std::to_string(complete_rows) + " stations received for " +
                           std::to_string(frame.num_strata()) + " strata; intervals are not informative");
  const auto preds = predictor_columns(catalog, data, opt.config.predictors);

  std::vector<Table> completed(opt.config.m);
  std::vector<std::vector<std::string>> chain_warnings(opt.config.m);
  parallel_for(opt.config.m, opt.workers, [&](std::size_t i) {
    auto rng = Rng{mi_chain_seed(opt.seed, i)};
    completed[i] = chained_impute(data, preds, opt.config, rng, &chain_warnings[i]);
  });
  for (const auto& w : chain_warnings.front()) res.warnings.push_back(w);

  res.runs.reserve(opt.config.m);
  for (std::size_t i = 0; i < opt.config.m; ++i) {
    const auto sample = group_by_stratum(catalog, frame, completed_returns(data, completed[i]));
    res.runs.push_back(bootstrap_chamber(catalog, sample, {opt.replicates, mi_bootstrap_seed(opt.seed, i), opt.workers}));
  }

  for (ForceIndex f = 0; f < catalog.num_forces(); ++f) {
    if (!catalog.is_candidate(f)) continue;
    std::vector<double> q, u;
    for (const auto& run : res.runs) {
      std::vector<int> seats;
      seats.reserve(run.chambers.size());
      for (const auto& c : run.chambers) seats.push_back(c.seats[f].total());
      q.push_back(sample_mean(seats));
      u.push_back(sample_variance(seats));
    }
    auto e = rubin_pool(q, u, opt.level, catalog.constants().total_seats);
    e.force = f;
    res.estimates.push_back(e);
  }
  return res;
}

}  // namespace quickcount
