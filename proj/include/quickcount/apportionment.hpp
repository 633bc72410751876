#pragma once

// Votes to seats: simple-majority district winners, national vote shares,
// the threshold filter and the capped iterative proportional representation
// with largest-remainder rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/table.hpp"

namespace quickcount {

namespace detail {

// Guard band applied before flooring quantities computed in floating point
// whose exact value may be an integer (seat quotas, seat caps).
inline constexpr double kFloorGuard = 1e-12;
// Fractional parts closer than this are treated as tied.
inline constexpr double kRemainderTie = 1e-9;

inline double guarded_floor(double x) { return std::floor(x + kFloorGuard); }

}  // namespace detail

/// A district candidacy: a registered coalition or a force running alone.
struct Candidacy {
  enum class Kind { force, coalition };
  Kind kind = Kind::force;
  std::size_t index = 0;  // ForceIndex or CoalitionIndex
  /// Force index used for tie-breaking; a coalition ranks as its lowest member.
  ForceIndex rank = 0;

  bool operator==(const Candidacy&) const = default;
};

struct DistrictWinner {
  int district = 0;
  Candidacy candidacy;
  ForceIndex seat_holder = 0;
  double votes = 0.0;
  bool tied = false;       // another candidacy had exactly the same votes
  bool degenerate = false; // every candidacy had zero votes
};

struct NationalShares {
  std::vector<double> nu;      // national votes per force after coalition splitting
  std::vector<double> lambda;  // share of valid votes (parties + independents)
  std::vector<double> eta;     // share among parties above the threshold
};

struct PartySeats {
  int majority = 0;
  int pr = 0;
  int total() const { return majority + pr; }
  bool operator==(const PartySeats&) const = default;
};

/// Seats per force (indexed like the catalog's forces). Independents only
/// ever hold majority seats; null and abstention rows stay zero.
struct ChamberComposition {
  std::vector<PartySeats> seats;

  int total() const {
    return std::accumulate(seats.begin(), seats.end(), 0, [](int acc, const PartySeats& s) { return acc + s.total(); });
  }
  int majority_total() const {
    return std::accumulate(seats.begin(), seats.end(), 0, [](int acc, const PartySeats& s) { return acc + s.majority; });
  }
  int pr_total() const {
    return std::accumulate(seats.begin(), seats.end(), 0, [](int acc, const PartySeats& s) { return acc + s.pr; });
  }
  bool operator==(const ChamberComposition&) const = default;
};

/// Candidacies present in a district, in force order.
inline std::vector<Candidacy> district_candidacies(const Catalog& catalog, int district) {
  std::vector<Candidacy> out;
  std::vector<bool> covered(catalog.num_forces(), false);
  for (CoalitionIndex c = 0; c < catalog.coalitions().size(); ++c) {
    const auto& co = catalog.coalitions()[c];
    if (!co.registered_in(district)) continue;
    for (ForceIndex m : co.members) covered[m] = true;
    out.push_back({Candidacy::Kind::coalition, c, co.members.front()});
  }
  for (ForceIndex f = 0; f < catalog.num_forces(); ++f)
    if (catalog.is_candidate(f) && !covered[f]) out.push_back({Candidacy::Kind::force, f, f});
  std::sort(out.begin(), out.end(), [](const Candidacy& a, const Candidacy& b) { return a.rank < b.rank; });
  return out;
}

/// Simple-majority winner from force totals (after coalition splitting).
/// A registered coalition competes with the sum of its members' votes and,
/// if it wins, the seat goes to the party named in its seat agreement.
/// Exact ties go to the candidacy with the lowest force index.
inline DistrictWinner district_winner(const Catalog& catalog, int district, std::span<const double> force_row) {
  if (force_row.size() != catalog.num_forces()) throw InputError("force row width does not match catalog");
  const auto candidacies = district_candidacies(catalog, district);
  if (candidacies.empty()) throw CatalogError("district " + std::to_string(district) + " has no candidacies");

  auto votes_of = [&](const Candidacy& c) {
    if (c.kind == Candidacy::Kind::force) return force_row[c.index];
    double sum = 0.0;
    for (ForceIndex m : catalog.coalitions()[c.index].members) sum += force_row[m];
    return sum;
  };

  DistrictWinner best;
  best.district = district;
  bool first = true;
  for (const auto& c : candidacies) {
    const double v = votes_of(c);
    if (first || v > best.votes) {
      best.candidacy = c;
      best.votes = v;
      best.tied = false;
      first = false;
    } else if (v == best.votes) {
      best.tied = true;  // candidacies arrive in rank order, so the incumbent keeps the seat
    }
  }
  best.degenerate = best.votes <= 0.0;
  best.seat_holder = best.candidacy.kind == Candidacy::Kind::force
                         ? best.candidacy.index
                         : catalog.coalitions()[best.candidacy.index].seat_holder(district);
  return best;
}

/// National totals and shares from per-district force totals.
inline NationalShares national_shares(const Catalog& catalog, const Table& force_totals) {
  const std::size_t J = catalog.num_forces();
  if (force_totals.cols() != J) throw InputError("force table width does not match catalog");
  NationalShares s;
  s.nu = force_totals.column_sums();
  s.lambda.assign(J, 0.0);
  s.eta.assign(J, 0.0);

  double valid = 0.0;
  for (ForceIndex f = 0; f < J; ++f)
    if (catalog.is_candidate(f)) valid += s.nu[f];
  if (!(valid > 0.0)) throw EstimationError("no valid votes nationally; shares are undefined");
  for (ForceIndex f = 0; f < J; ++f)
    if (catalog.is_candidate(f)) s.lambda[f] = s.nu[f] / valid;

  const double threshold = catalog.constants().threshold;
  double qualifying = 0.0;
  for (ForceIndex f = 0; f < J; ++f)
    if (catalog.is_party(f) && s.lambda[f] - threshold > detail::kFloorGuard) qualifying += s.nu[f];
  if (qualifying > 0.0)
    for (ForceIndex f = 0; f < J; ++f)
      if (catalog.is_party(f) && s.lambda[f] - threshold > detail::kFloorGuard) s.eta[f] = s.nu[f] / qualifying;
  return s;
}

/// Hamilton / largest-remainder apportionment of `seats` by `weights`.
/// Ties in the fractional part go to the larger weight, then the lower index.
inline std::vector<int> largest_remainder(int seats, std::span<const double> weights) {
  if (seats < 0) throw InputError("negative seat count");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("negative or NaN apportionment weight");
    sum += w;
  }
  std::vector<int> alloc(weights.size(), 0);
  if (seats == 0) return alloc;
  if (std::abs(sum - 1.0) > 1e-12) throw InputError("apportionment weights must sum to 1");

  std::vector<double> frac(weights.size());
  int given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = seats * weights[i];
    const double fl = detail::guarded_floor(quota);
    alloc[i] = static_cast<int>(fl);
    frac[i] = quota - fl;
    given += alloc[i];
  }
  // Sort by remainder, then re-order each run of near-equal remainders by
  // weight and index (a tolerance inside the comparator would not be a
  // strict weak ordering).
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  auto by_weight = [&](std::size_t a, std::size_t b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return a < b;
  };
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && frac[order[hi - 1]] - frac[order[hi]] <= detail::kRemainderTie) ++hi;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi), by_weight);
    lo = hi;
  }
  for (std::size_t k = 0; given < seats; ++k, ++given) ++alloc[order[k % order.size()]];
  return alloc;
}

/// Maximum seats for a party with post-threshold share eta.
inline int seat_cap(double eta, const ElectoralConstants& k) {
  const double bound = detail::guarded_floor(k.total_seats * (eta + k.overrepresentation_margin));
  return static_cast<int>(std::min<double>(k.seat_cap, bound));
}

/// Iterative capped proportional representation. Each round distributes the
/// open PR seats over the remaining pool; the party exceeding its cap by the
/// most is then frozen at cap - majority seats (never below zero) and leaves
/// the pool. Majority seats are never revoked.
inline ChamberComposition allocate_pr(const Catalog& catalog, std::span<const int> majority,
                                      const NationalShares& shares) {
  const std::size_t J = catalog.num_forces();
  const auto& k = catalog.constants();
  if (majority.size() != J || shares.eta.size() != J) throw InputError("seat/share vectors do not match catalog");

  ChamberComposition out;
  out.seats.assign(J, {});
  for (ForceIndex f = 0; f < J; ++f) out.seats[f].majority = majority[f];

  std::vector<ForceIndex> pool;
  for (ForceIndex f = 0; f < J; ++f)
    if (catalog.is_party(f) && shares.eta[f] > 0.0) pool.push_back(f);

  std::vector<int> cap(J, 0);
  for (ForceIndex f : pool) cap[f] = seat_cap(shares.eta[f], k);

  int open = k.pr_seats;
  for (;;) {
    if (open == 0) break;
    if (pool.empty()) throw EstimationError("no qualifying party left for " + std::to_string(open) + " PR seats");
    double mass = 0.0;
    for (ForceIndex f : pool) mass += shares.eta[f];
    std::vector<double> weights;
    weights.reserve(pool.size());
    for (ForceIndex f : pool) weights.push_back(shares.eta[f] / mass);
    const auto alloc = largest_remainder(open, weights);

    std::optional<std::size_t> worst;
    int worst_excess = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const int excess = majority[pool[i]] + alloc[i] - cap[pool[i]];
      if (excess > 0 && (!worst || excess > worst_excess)) {
        worst = i;
        worst_excess = excess;
      }
    }
    if (!worst) {
      for (std::size_t i = 0; i < pool.size(); ++i) out.seats[pool[i]].pr = alloc[i];
      break;
    }
    const ForceIndex f = pool[*worst];
    out.seats[f].pr = std::max(0, cap[f] - majority[f]);
    open -= out.seats[f].pr;
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(*worst));
  }
  return out;
}

struct ChamberResult {
  ChamberComposition chamber;
  NationalShares shares;
  std::vector<DistrictWinner> winners;
};

/// District winners, national shares and PR allocation from per-district
/// force totals (rows aligned with `districts`).
inline ChamberResult compose_from_forces(const Catalog& catalog, std::span<const int> districts,
                                         const Table& force_totals) {
  const std::size_t J = catalog.num_forces();
  if (force_totals.rows() != districts.size()) throw InputError("one force row per district required");
  if (static_cast<int>(districts.size()) != catalog.constants().majority_seats)
    throw InputError("district count " + std::to_string(districts.size()) + " does not match " +
                     std::to_string(catalog.constants().majority_seats) + " majority seats");
  ChamberResult res;
  res.winners.reserve(districts.size());
  std::vector<int> majority(J, 0);
  for (std::size_t h = 0; h < districts.size(); ++h) {
    res.winners.push_back(district_winner(catalog, districts[h], force_totals.row(h)));
    ++majority[res.winners.back().seat_holder];
  }
  res.shares = national_shares(catalog, force_totals);
  res.chamber = allocate_pr(catalog, majority, res.shares);
  return res;
}

/// Splits every district's option totals into force totals.
inline Table split_table(const Catalog& catalog, const Table& option_totals) {
  if (option_totals.cols() != catalog.num_options()) throw InputError("option table width does not match catalog");
  Table forces(option_totals.rows(), catalog.num_forces());
  for (std::size_t h = 0; h < option_totals.rows(); ++h)
    split_into_forces<double>(catalog, option_totals.row(h), forces.row(h));
  return forces;
}

/// Full votes-to-seats pipeline from per-district option totals.
inline ChamberResult compose_chamber(const Catalog& catalog, std::span<const int> districts,
                                     const Table& option_totals) {
  return compose_from_forces(catalog, districts, split_table(catalog, option_totals));
}

/// Checks the chamber invariants; returns an empty string when all hold.
inline std::string chamber_violation(const Catalog& catalog, const ChamberComposition& c, const NationalShares& s) {
  const auto& k = catalog.constants();
  if (c.total() != k.total_seats) return "total seats " + std::to_string(c.total());
  if (c.majority_total() != k.majority_seats) return "majority seats " + std::to_string(c.majority_total());
  if (c.pr_total() != k.pr_seats) return "pr seats " + std::to_string(c.pr_total());
  for (ForceIndex f = 0; f < c.seats.size(); ++f) {
    const auto& p = c.seats[f];
    if (p.pr < 0) return "negative pr seats for " + catalog.force(f).id;
    if (p.pr > 0 && !catalog.is_party(f)) return "pr seats for non-party " + catalog.force(f).id;
    if (catalog.is_party(f)) {
      const int cap = seat_cap(s.eta[f], k);
      if (p.majority <= cap && p.total() > cap) return "cap exceeded by " + catalog.force(f).id;
      if (p.majority > cap && p.pr != 0) return "pr seats above cap for " + catalog.force(f).id;
    }
  }
  return {};
}

}  // namespace quickcount
