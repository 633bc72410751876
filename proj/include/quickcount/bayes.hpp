#pragma once

// Conjugate normal-gamma model per stratum and force, posterior simulation
// and chamber conformation per draw.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "quickcount/apportionment.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"
#include "quickcount/summary.hpp"
#include "quickcount/truncnorm.hpp"

namespace quickcount {

/// Sufficient statistics of one stratum, per force:
/// T_j = sum_r x_rj, U_j = sum_r x_rj^2 / l_r, v = sum_r l_r.
struct StratumStats {
  int stratum = 0;
  std::size_t n = 0;
  double v = 0.0;
  std::vector<double> T;
  std::vector<double> U;
  bool imputed = false;

  bool has_data() const { return n > 0; }
};

inline StratumStats empty_stats(int stratum, std::size_t num_forces) {
  return {stratum, 0, 0.0, std::vector<double>(num_forces, 0.0), std::vector<double>(num_forces, 0.0), false};
}

/// Adds one station (force votes x, nominal list l) to the statistics.
inline void add_station(StratumStats& s, std::span<const double> x, double l) {
  if (!(l >= 1.0)) throw InputError("station nominal list must be at least 1");
  if (x.size() != s.T.size()) throw InputError("force vector width does not match statistics");
  ++s.n;
  s.v += l;
  for (std::size_t j = 0; j < x.size(); ++j) {
    s.T[j] += x[j];
    s.U[j] += x[j] * x[j] / l;
  }
}

/// Statistics for every frame stratum from complete returns (split into
/// forces station by station). Returns with missing cells are skipped.
inline std::vector<StratumStats> sufficient_stats(const Catalog& catalog, const Frame& frame,
                                                  const std::vector<StationReturn>& returns) {
  const std::size_t J = catalog.num_forces();
  std::vector<StratumStats> out;
  out.reserve(frame.num_strata());
  for (int id : frame.strata()) out.push_back(empty_stats(id, J));
  std::vector<std::int64_t> opts(catalog.num_options()), forces(J);
  std::vector<double> x(J);
  for (const auto& r : returns) {
    if (!r.complete()) continue;
    const std::size_t h = frame.require_stratum(r.key.stratum);
    if (r.nominal_list < 1) throw InputError("station " + to_string(r.key) + " has an empty nominal list");
    const auto row = option_row(catalog, r);
    for (std::size_t o = 0; o < opts.size(); ++o) opts[o] = static_cast<std::int64_t>(row[o]);
    split_into_forces<std::int64_t>(catalog, opts, forces);
    for (std::size_t j = 0; j < J; ++j) x[j] = static_cast<double>(forces[j]);
    add_station(out[h], x, r.nominal_list);
  }
  return out;
}

/// theta | tau ~ N(mean, precision tau * precision_scale) truncated to (0, 1);
/// tau ~ Gamma(shape, rate).
struct PosteriorParams {
  double mean = 0.0;
  double precision_scale = 0.0;
  double shape = 0.0;
  double rate = 0.0;
};

/// Posterior for force j of a stratum under the Ga(prior_shape, prior_rate)
/// prior on tau: shape = prior_shape + (n - 1) / 2 and
/// rate = prior_rate + (U - T^2 / v) / 2, which with the default prior is
/// Ga(n/2, (1/10 + U - T^2/v) / 2).
inline PosteriorParams posterior_params(const StratumStats& s, ForceIndex j, double prior_shape = 0.5,
                                        double prior_rate = 0.05) {
  if (s.n == 0) throw MissingStratumError("stratum " + std::to_string(s.stratum) + " has no data; impute it first");
  if (!(s.v > 0.0)) throw InputError("stratum " + std::to_string(s.stratum) + " has zero nominal list");
  PosteriorParams p;
  p.mean = s.T.at(j) / s.v;
  p.precision_scale = s.v;
  p.shape = prior_shape + 0.5 * (static_cast<double>(s.n) - 1.0);
  // non-negative by Cauchy-Schwarz; the clamp only absorbs rounding
  const double residual = std::max(0.0, s.U[j] - s.T[j] * s.T[j] / s.v);
  p.rate = prior_rate + 0.5 * residual;
  return p;
}

/// Joint draw of (theta, tau) for one cell.
struct CellDraw {
  double theta = 0.0;
  double tau = 0.0;
};

inline CellDraw draw_cell(const PosteriorParams& p, Rng& rng) {
  std::gamma_distribution<double> gamma(p.shape, 1.0 / p.rate);
  double tau = gamma(rng);
  if (!(tau > 0.0)) tau = std::numeric_limits<double>::min();
  const double sd = 1.0 / std::sqrt(tau * p.precision_scale);
  return {truncated_normal_unit(p.mean, std::isfinite(sd) ? sd : std::numeric_limits<double>::max(), rng), tau};
}

/// D posterior draws of theta for one cell.
inline std::vector<double> sample_cell(const PosteriorParams& p, std::size_t draws, Rng& rng) {
  std::vector<double> out(draws);
  for (auto& t : out) t = draw_cell(p, rng).theta;
  return out;
}

/// Nominal-list weighted national proportion theta_j = sum_h (l_h / l) theta_hj.
inline std::vector<double> national_theta(const Table& theta, std::span<const double> nominal) {
  if (theta.rows() != nominal.size()) throw InputError("one nominal list per stratum required");
  std::vector<double> out(theta.cols(), 0.0);
  double l = 0.0;
  for (double x : nominal) l += x;
  for (std::size_t h = 0; h < theta.rows(); ++h)
    for (std::size_t j = 0; j < theta.cols(); ++j) out[j] += nominal[h] / l * theta(h, j);
  return out;
}

struct BayesOptions {
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// D posterior conformations of the chamber. Draw d uses stream d of the seed.
/// Each draw turns theta_hj into force totals l_h * theta_hj and applies the
/// seat rules, so a coalition wins a district when its members' combined
/// proportion is largest.
inline ChamberRun bayes_chamber(const Catalog& catalog, const Frame& frame, const std::vector<StratumStats>& stats,
                                const BayesOptions& opt) {
  if (opt.draws == 0) throw InputError("posterior simulation needs at least one draw");
  if (stats.size() != frame.num_strata()) throw InputError("one set of statistics per frame stratum required");
  const std::size_t J = catalog.num_forces();
  const std::size_t L = stats.size();
  std::vector<PosteriorParams> params(L * J);
  std::vector<double> nominal(L);
  ChamberRun run;
  run.size = opt.draws;
  run.seed = opt.seed;
  for (std::size_t h = 0; h < L; ++h) {
    if (stats[h].stratum != frame.strata()[h]) throw InputError("statistics are not in frame stratum order");
    if (stats[h].T.size() != J) throw InputError("statistics width does not match catalog");
    for (ForceIndex j = 0; j < J; ++j) params[h * J + j] = posterior_params(stats[h], j);
    nominal[h] = frame.nominal_list(h);
    run.districts.push_back(stats[h].stratum);
  }
  run.chambers.resize(opt.draws);
  run.shares.resize(opt.draws);
  run.seat_holders.resize(opt.draws);

  parallel_for(opt.draws, opt.workers, [&](std::size_t d) {
    auto rng = make_stream(opt.seed, d);
    Table totals(L, J);
    for (std::size_t h = 0; h < L; ++h)
      for (ForceIndex j = 0; j < J; ++j) totals(h, j) = nominal[h] * draw_cell(params[h * J + j], rng).theta;
    auto res = compose_from_forces(catalog, run.districts, totals);
    run.chambers[d] = std::move(res.chamber);
    run.shares[d] = std::move(res.shares);
    auto& holders = run.seat_holders[d];
    holders.reserve(L);
    for (const auto& w : res.winners) holders.push_back(w.seat_holder);
  });
  return run;
}

/// Credible level (percent) for the share of the planned sample received:
/// [0,60) -> 99, [60,70) -> 98, [70,80) -> 97, [80,90) -> 96, [90,100] -> 95.
inline int credibility_adjust(std::size_t received, std::size_t planned) {
  if (planned == 0) throw InputError("planned sample is empty");
  if (received > planned) throw InputError("more stations received than planned");
  const auto r = static_cast<unsigned long long>(received) * 100;
  const auto p = static_cast<unsigned long long>(planned);
  if (r < 60 * p) return 99;
  if (r < 70 * p) return 98;
  if (r < 80 * p) return 97;
  if (r < 90 * p) return 96;
  return 95;
}

inline int credibility_adjust(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("received fraction must lie in [0, 1]");
  const double pct = fraction * 100.0 + 1e-9;
  if (pct < 60.0) return 99;
  if (pct < 70.0) return 98;
  if (pct < 80.0) return 97;
  if (pct < 90.0) return 96;
  return 95;
}

}  // namespace quickcount
