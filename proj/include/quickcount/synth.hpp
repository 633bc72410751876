#pragma once

// Synthetic frames, populations and catalogs for simulation studies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"

namespace quickcount {

/// Region of a block of strata: state name, time-zone offset and count.
struct RegionBlock {
  std::string state;
  int tz_offset = 0;
  int strata = 0;
};

/// The 300-district layout used for the default augmentation rules: states
/// two hours behind the reference zone, states one hour behind, Guerrero,
/// and the remaining districts.
inline std::vector<RegionBlock> mexico_layout() {
  return {{"Baja California", -2, 8}, {"Sonora", -2, 7},   {"Chihuahua", -1, 9}, {"Baja California Sur", -1, 2},
          {"Nayarit", -1, 3},         {"Sinaloa", -1, 7},  {"Guerrero", 0, 9},   {"Other", 0, 255}};
}

struct FrameConfig {
  std::vector<RegionBlock> layout;   // empty: `strata` districts in one block
  int strata = 30;
  int stations_per_stratum = 50;
  int min_nominal = 100;
  int max_nominal = 750;
  double urban_fraction = 0.7;
};

/// Frame with district ids 1..L in layout order; nominal lists uniform on
/// [min_nominal, max_nominal].
inline Frame synthetic_frame(const FrameConfig& cfg, std::uint64_t seed) {
  auto layout = cfg.layout;
  if (layout.empty()) layout.push_back({"Other", 0, cfg.strata});
  if (cfg.stations_per_stratum < 1) throw InputError("strata need at least one station");
  auto rng = make_stream(seed, 0);
  std::uniform_int_distribution<int> list(cfg.min_nominal, cfg.max_nominal);
  std::vector<StationInfo> st;
  int district = 0;
  for (const auto& block : layout)
    for (int b = 0; b < block.strata; ++b) {
      ++district;
      for (int i = 0; i < cfg.stations_per_stratum; ++i) {
        StationInfo s;
        s.key = {district, i};
        s.nominal_list = list(rng);
        s.urban = uniform_open(rng) < cfg.urban_fraction;
        s.state = block.state;
        s.tz_offset = block.tz_offset;
        st.push_back(s);
      }
    }
  return Frame(std::move(st), std::max(cfg.max_nominal, 1));
}

struct PopulationConfig {
  /// Expected share of each ballot option among ballots cast (catalog ballot
  /// order); normalized internally. Options with share 0 never receive votes.
  std::vector<double> national_shares;
  double stratum_concentration = 150.0;  // Dirichlet concentration around national shares
  double station_concentration = 400.0;  // Dirichlet concentration around stratum shares
  double turnout = 0.55;
  double turnout_spread = 0.08;          // sd of stratum turnout
  double urban_shift = 0.0;              // multiplicative boost of option 0 in urban stations
};

namespace detail {

inline std::vector<double> dirichlet(const std::vector<double>& mean, double concentration, Rng& rng) {
  std::vector<double> out(mean.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (mean[i] <= 0.0) continue;
    std::gamma_distribution<double> g(concentration * mean[i], 1.0);
    out[i] = g(rng);
    sum += out[i];
  }
  if (sum > 0.0)
    for (double& x : out) x /= sum;
  return out;
}

inline std::vector<std::int64_t> multinomial(std::int64_t n, const std::vector<double>& p, Rng& rng) {
  std::vector<std::int64_t> out(p.size(), 0);
  double rest = 1.0;
  for (std::size_t i = 0; i < p.size() && n > 0; ++i) {
    if (i + 1 == p.size() || rest <= 0.0) {
      out[i] = n;
      break;
    }
    const double q = std::clamp(p[i] / rest, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> b(n, q);
    out[i] = b(rng);
    n -= out[i];
    rest -= p[i];
  }
  return out;
}

}  // namespace detail

/// Complete returns for every frame station (aligned with frame.stations()).
inline std::vector<StationReturn> synthetic_population(const Catalog& catalog, const Frame& frame,
                                                       const PopulationConfig& cfg, std::uint64_t seed) {
  const std::size_t C = catalog.num_ballot_options();
  if (cfg.national_shares.size() != C) throw InputError("one national share per ballot option required");
  std::vector<double> national = cfg.national_shares;
  double total = 0.0;
  for (double x : national) {
    if (!(x >= 0.0)) throw InputError("national shares must be non-negative");
    total += x;
  }
  if (!(total > 0.0)) throw InputError("national shares sum to zero");
  for (double& x : national) x /= total;

  std::vector<StationReturn> out;
  out.reserve(frame.population_size());
  for (std::size_t h = 0; h < frame.num_strata(); ++h) {
    auto rng = make_stream(seed, h, 1);
    const auto stratum = detail::dirichlet(national, cfg.stratum_concentration, rng);
    std::normal_distribution<double> tz(cfg.turnout, cfg.turnout_spread);
    const double turnout = std::clamp(tz(rng), 0.05, 0.95);
    for (std::size_t i : frame.stations_in(h)) {
      const auto& s = frame.station(i);
      auto shares = detail::dirichlet(stratum, cfg.station_concentration, rng);
      if (s.urban && cfg.urban_shift != 0.0 && !shares.empty()) {
        shares[0] *= 1.0 + cfg.urban_shift;
        double sum = 0.0;
        for (double x : shares) sum += x;
        for (double& x : shares) x /= sum;
      }
      std::binomial_distribution<std::int64_t> cast(s.nominal_list, turnout);
      const auto votes = detail::multinomial(cast(rng), shares, rng);
      StationReturn r;
      r.key = s.key;
      r.nominal_list = s.nominal_list;
      for (auto v : votes) r.votes.emplace_back(v);
      out.push_back(std::move(r));
    }
  }
  return out;
}

/// Nine parties (the first two in a coalition with a joint option), one
/// independent, null votes and abstention, with seat constants scaled to
/// `districts` majority seats (PR seats and caps in the 300/200/300 ratio).
inline Catalog synthetic_catalog(int districts = 300) {
  std::vector<PoliticalForce> forces;
  for (const char* id : {"PA", "PB", "PC", "PD", "PE", "PF", "PG", "PH", "PI"}) forces.push_back({id, ForceKind::party});
  forces.push_back({"IND", ForceKind::independent});
  forces.push_back({"NUL", ForceKind::null_unregistered});
  forces.push_back({"ABS", ForceKind::abstention});
  Coalition c{"PA_PB", {0, 1}, {}, ForceIndex{0}};
  ElectoralConstants k;
  if (districts != 300) {
    if (districts % 3 != 0) throw InputError("scaled chambers need a multiple of 3 districts");
    k.majority_seats = districts;
    k.pr_seats = districts / 3 * 2;
    k.total_seats = k.majority_seats + k.pr_seats;
    k.seat_cap = districts;
  }
  Catalog cat(forces, {{"PA_PB", {0, 1}}}, {c}, k);
  cat.set_mi_predictors({0, 1, 2, 3});
  return cat;
}

/// Ballot shares roughly shaped like a fragmented nine-party race.
inline std::vector<double> synthetic_shares(const Catalog& catalog) {
  std::vector<double> shares(catalog.num_ballot_options(), 0.0);
  const std::vector<double> parties{0.30, 0.18, 0.16, 0.09, 0.07, 0.05, 0.04, 0.025, 0.02};
  for (std::size_t p = 0; p < parties.size() && p < catalog.num_forces(); ++p)
    if (auto o = catalog.single_option(p)) shares[*o] = parties[p];
  for (std::size_t o = 0; o < catalog.num_ballot_options(); ++o) {
    const auto& opt = catalog.option(o);
    if (opt.is_combination()) shares[o] = 0.01;
    else if (catalog.is_independent(opt.composition.front())) shares[o] = 0.005;
    else if (opt.composition.front() == catalog.null_force()) shares[o] = 0.02;
  }
  return shares;
}

}  // namespace quickcount
