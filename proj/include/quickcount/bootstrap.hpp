#pragma once

// Mirror-match stratified bootstrap for complete samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quickcount/apportionment.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/summary.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"

namespace quickcount {

/// One resampling design: `repeats` independent SRSWOR draws of `draw_size`
/// stations each, used with probability `probability`.
struct MirrorMatchDesign {
  std::size_t draw_size = 0;
  std::size_t repeats = 0;
  double probability = 0.0;

  std::size_t size() const { return draw_size * repeats; }
  /// c such that the resample mean has variance c * s^2 under this design.
  double variance_factor(std::size_t n) const {
    return (1.0 - static_cast<double>(draw_size) / static_cast<double>(n)) /
           (static_cast<double>(draw_size) * static_cast<double>(repeats));
  }
};

struct MirrorMatchParams {
  std::size_t sample_size = 0;      // n_h
  std::size_t population_size = 0;  // N_h
  double f = 0.0;                   // n_h / N_h
  double k = 0.0;                   // 1 / f
  double m = 0.0;                   // f * n_h
  bool integral = false;            // k and m both integers
  bool variance_matched = true;     // expected resampling variance equals the design variance
  std::vector<MirrorMatchDesign> designs;  // one (integral) or two (randomized)
};

namespace detail {

inline bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace detail

/// f, k = 1/f and m = f n for one stratum. When k or m is not an integer the
/// design is randomized between two integer mirror-match designs. Writing
/// c(m', k') = (1 - m'/n) / (m' k') for the resampling variance of the mean
/// in units of s^2 and c* = (1 - f) / n for the SRSWOR design variance,
/// candidates use m' in {floor(m), ceil(m)} (within [1, n]) and k' in
/// {floor(n/m'), ceil(n/m')}. The closest candidate below c* and the closest
/// above are mixed with probabilities p_above = (c* - c_below) / (c_above -
/// c_below), which makes the expected resampling variance equal c*. If the
/// natural candidates do not bracket c*, k' is searched over [1, ceil(n/m')+1].
inline MirrorMatchParams mirror_match_params(std::size_t n, std::size_t N) {
  if (n == 0) throw MissingStratumError("mirror-match needs at least one sampled station");
  if (n > N) throw DesignError("sample size exceeds stratum size");
  MirrorMatchParams p;
  p.sample_size = n;
  p.population_size = N;
  const double dn = static_cast<double>(n);
  p.f = dn / static_cast<double>(N);
  p.k = 1.0 / p.f;
  p.m = p.f * dn;
  p.integral = detail::near_integer(p.k) && detail::near_integer(p.m) && std::round(p.m) >= 1.0;
  if (p.integral) {
    p.designs.push_back({static_cast<std::size_t>(std::round(p.m)), static_cast<std::size_t>(std::round(p.k)), 1.0});
    return p;
  }

  const double target = (1.0 - p.f) / dn;
  std::vector<std::size_t> draw_sizes;
  for (double mm : {std::floor(p.m), std::ceil(p.m)}) {
    const auto v = static_cast<std::size_t>(std::clamp(mm, 1.0, dn));
    if (std::find(draw_sizes.begin(), draw_sizes.end(), v) == draw_sizes.end()) draw_sizes.push_back(v);
  }

  auto choose = [&](const std::vector<MirrorMatchDesign>& cands) {
    std::optional<MirrorMatchDesign> below, above;
    auto size_gap = [&](const MirrorMatchDesign& d) {
      return std::abs(static_cast<double>(d.size()) - dn);
    };
    for (const auto& d : cands) {
      const double c = d.variance_factor(n);
      if (c <= target) {
        if (!below || c > below->variance_factor(n) ||
            (c == below->variance_factor(n) && size_gap(d) < size_gap(*below)))
          below = d;
      }
      if (c >= target) {
        if (!above || c < above->variance_factor(n) ||
            (c == above->variance_factor(n) && size_gap(d) < size_gap(*above)))
          above = d;
      }
    }
    return std::pair{below, above};
  };

  std::vector<MirrorMatchDesign> natural;
  for (std::size_t ms : draw_sizes) {
    const double ratio = dn / static_cast<double>(ms);
    for (double kk : {std::floor(ratio), std::ceil(ratio)}) {
      const auto kv = static_cast<std::size_t>(std::max(1.0, kk));
      natural.push_back({ms, kv, 0.0});
    }
  }
  auto [below, above] = choose(natural);
  if (!below || !above) {
    std::vector<MirrorMatchDesign> wide;
    for (std::size_t ms : draw_sizes) {
      const auto kmax = static_cast<std::size_t>(std::ceil(dn / static_cast<double>(ms))) + 1;
      for (std::size_t kv = 1; kv <= kmax; ++kv) wide.push_back({ms, kv, 0.0});
    }
    std::tie(below, above) = choose(wide);
  }

  if (below && above) {
    const double cb = below->variance_factor(n);
    const double ca = above->variance_factor(n);
    if (ca == cb) {
      p.designs.push_back({below->draw_size, below->repeats, 1.0});
    } else {
      const double pa = (target - cb) / (ca - cb);
      p.designs.push_back({below->draw_size, below->repeats, 1.0 - pa});
      p.designs.push_back({above->draw_size, above->repeats, pa});
    }
  } else {
    // n = 1 and similar: no design reaches the target variance.
    const auto& only = below ? *below : *above;
    p.designs.push_back({only.draw_size, only.repeats, 1.0});
    p.variance_matched = false;
  }
  return p;
}

/// Row indices of one mirror-match resample: `repeats` independent SRSWOR
/// draws of `draw_size` rows, concatenated.
inline std::vector<std::size_t> mirror_match_indices(const MirrorMatchParams& params, Rng& rng) {
  const MirrorMatchDesign* design = &params.designs.front();
  if (params.designs.size() > 1) {
    const double u = uniform_open(rng);
    design = u < params.designs.front().probability ? &params.designs[0] : &params.designs[1];
  }
  std::vector<std::size_t> pool(params.sample_size);
  std::vector<std::size_t> out;
  out.reserve(design->size());
  for (std::size_t rep = 0; rep < design->repeats; ++rep) {
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    partial_shuffle(pool, design->draw_size, rng);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(design->draw_size));
  }
  return out;
}

/// Resampled rows of one stratum.
inline Table mirror_match_resample(const Table& rows, const MirrorMatchParams& params, Rng& rng) {
  if (rows.rows() != params.sample_size) throw InputError("stratum rows do not match mirror-match parameters");
  Table out(0, rows.cols());
  for (std::size_t i : mirror_match_indices(params, rng)) out.append_row(rows.row(i));
  return out;
}

/// Expansion estimate N_h / n* * sum over one resample, n* its realized size.
inline void resampled_totals(const Table& rows, const MirrorMatchParams& params, Rng& rng, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto idx = mirror_match_indices(params, rng);
  for (std::size_t i : idx) {
    const auto r = rows.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += r[c];
  }
  const double factor = static_cast<double>(params.population_size) / static_cast<double>(idx.size());
  for (double& x : out) x *= factor;
}

struct BootstrapOptions {
  std::size_t replicates = 300;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// B mirror-match replicates of the chamber. Replicate b uses stream b of the
/// seed, so the run is identical for any worker count.
inline ChamberRun bootstrap_chamber(const Catalog& catalog, const std::vector<StratumSample>& sample,
                                      const BootstrapOptions& opt) {
  if (opt.replicates == 0) throw InputError("bootstrap needs at least one replicate");
  std::vector<MirrorMatchParams> params;
  params.reserve(sample.size());
  ChamberRun run;
  run.size = opt.replicates;
  run.seed = opt.seed;
  for (const auto& s : sample) {
    if (s.rows.rows() == 0)
      throw MissingStratumError("stratum " + std::to_string(s.stratum) + " has no returns; impute it first");
    if (s.rows.cols() != catalog.num_options()) throw InputError("sample width does not match catalog");
    params.push_back(mirror_match_params(s.rows.rows(), s.population_size));
    run.districts.push_back(s.stratum);
  }
  run.chambers.resize(opt.replicates);
  run.shares.resize(opt.replicates);
  run.seat_holders.resize(opt.replicates);

  parallel_for(opt.replicates, opt.workers, [&](std::size_t b) {
    auto rng = make_stream(opt.seed, b);
    Table totals(sample.size(), catalog.num_options());
    for (std::size_t h = 0; h < sample.size(); ++h) resampled_totals(sample[h].rows, params[h], rng, totals.row(h));
    auto res = compose_chamber(catalog, run.districts, totals);
    run.chambers[b] = std::move(res.chamber);
    run.shares[b] = std::move(res.shares);
    auto& holders = run.seat_holders[b];
    holders.reserve(res.winners.size());
    for (const auto& w : res.winners) holders.push_back(w.seat_holder);
  });
  return run;
}

}  // namespace quickcount
