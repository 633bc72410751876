#pragma once

// Interval summaries of simulated chambers (bootstrap replicates or
// posterior draws).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "quickcount/apportionment.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/quantile.hpp"
#include "quickcount/table.hpp"

namespace quickcount {

/// Simulated chambers from bootstrap replicates or posterior draws.
struct ChamberRun {
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::vector<int> districts;
  std::vector<ChamberComposition> chambers;
  std::vector<NationalShares> shares;
  std::vector<std::vector<ForceIndex>> seat_holders;  // [replicate][district]
};

struct SeatEstimate {
  ForceIndex force = 0;
  Interval<int> interval;
  double mean = 0.0;
  double variance = 0.0;
};

/// Per-candidate (party or independent) seat interval, mean and variance.
inline std::vector<SeatEstimate> summarize_seats(const Catalog& catalog, const std::vector<ChamberComposition>& chambers,
                                                 double level, bool hpd = false) {
  std::vector<SeatEstimate> out;
  for (ForceIndex f = 0; f < catalog.num_forces(); ++f) {
    if (!catalog.is_candidate(f)) continue;
    std::vector<int> seats;
    seats.reserve(chambers.size());
    for (const auto& c : chambers) seats.push_back(c.seats[f].total());
    SeatEstimate e;
    e.force = f;
    e.interval = hpd ? hpd_interval(seats, level) : seat_interval(seats, level);
    e.mean = sample_mean(seats);
    e.variance = sample_variance(seats);
    out.push_back(e);
  }
  return out;
}

/// Share of replicates in which each force holds each district's seat
/// (districts x forces).
inline Table winner_probabilities(std::size_t num_forces, const std::vector<std::vector<ForceIndex>>& holders) {
  if (holders.empty()) return {};
  Table p(holders.front().size(), num_forces);
  for (const auto& rep : holders)
    for (std::size_t h = 0; h < rep.size(); ++h) p(h, rep[h]) += 1.0;
  p.scale(1.0 / static_cast<double>(holders.size()));
  return p;
}

struct ShareEstimate {
  ForceIndex force = 0;
  Interval<double> interval;
  double mean = 0.0;
};

/// Per-candidate interval of the national valid-vote share lambda.
inline std::vector<ShareEstimate> summarize_shares(const Catalog& catalog, const std::vector<NationalShares>& shares,
                                                   double level) {
  std::vector<ShareEstimate> out;
  for (ForceIndex f = 0; f < catalog.num_forces(); ++f) {
    if (!catalog.is_candidate(f)) continue;
    std::vector<double> v;
    v.reserve(shares.size());
    for (const auto& s : shares) v.push_back(s.lambda[f]);
    out.push_back({f, percentile_interval(v, level), sample_mean(v)});
  }
  return out;
}

}  // namespace quickcount
