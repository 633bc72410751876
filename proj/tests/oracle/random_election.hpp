#pragma once

// Random catalogs and integer district returns for seat-rule fuzzing.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/table.hpp"

namespace qc_oracle {

struct RandomElection {
  quickcount::Catalog catalog;
  std::vector<int> districts;
  std::vector<std::vector<std::int64_t>> votes;  // district x option

  quickcount::Table option_table() const {
    quickcount::Table t(votes.size(), catalog.num_options());
    for (std::size_t d = 0; d < votes.size(); ++d)
      for (std::size_t o = 0; o < votes[d].size(); ++o) t(d, o) = static_cast<double>(votes[d][o]);
    return t;
  }
};

/// 3-10 parties, up to 2 independents, up to 2 coalitions (some registered in
/// a subset of districts, some with per-district seat agreements), all
/// combination options of each coalition. Party strength is skewed so that a
/// dominant party sometimes hits the seat cap, and small parties sometimes
/// fall below the threshold.
inline RandomElection random_election(std::mt19937_64& rng, const quickcount::ElectoralConstants& k = {}) {
  using namespace quickcount;
  std::uniform_int_distribution<int> n_parties(3, 10), n_ind(0, 2), n_coal(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const int P = n_parties(rng);
  const int I = n_ind(rng);
  std::vector<PoliticalForce> forces;
  for (int p = 0; p < P; ++p) forces.push_back({"P" + std::to_string(p), ForceKind::party});
  for (int i = 0; i < I; ++i) forces.push_back({"I" + std::to_string(i), ForceKind::independent});
  forces.push_back({"NUL", ForceKind::null_unregistered});
  forces.push_back({"ABS", ForceKind::abstention});

  const int L = k.majority_seats;
  std::vector<int> districts(static_cast<std::size_t>(L));
  for (int d = 0; d < L; ++d) districts[static_cast<std::size_t>(d)] = d + 1;

  // Disjoint coalitions of 2-3 parties.
  std::vector<int> perm(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) perm[static_cast<std::size_t>(p)] = p;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Coalition> coalitions;
  std::vector<VotingOption> combos;
  std::size_t next = 0;
  const int C = n_coal(rng);
  for (int c = 0; c < C; ++c) {
    const std::size_t size = u(rng) < 0.6 ? 2 : 3;
    if (next + size > perm.size()) break;
    Coalition co;
    co.id = "C" + std::to_string(c);
    for (std::size_t i = 0; i < size; ++i) co.members.push_back(static_cast<ForceIndex>(perm[next + i]));
    next += size;
    std::sort(co.members.begin(), co.members.end());
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    const bool everywhere = u(rng) < 0.6;
    if (everywhere) co.default_holder = co.members[pick(rng)];
    for (int d : districts) {
      if (everywhere) {
        if (u(rng) < 0.2) co.seat_agreement[d] = co.members[pick(rng)];
      } else if (u(rng) < 0.7) {
        co.seat_agreement[d] = co.members[pick(rng)];
      }
    }
    // every subset of two or more members
    for (unsigned mask = 1; mask < (1u << size); ++mask) {
      if (__builtin_popcount(mask) < 2) continue;
      VotingOption o;
      o.id = co.id;
      for (std::size_t i = 0; i < size; ++i)
        if (mask & (1u << i)) {
          o.composition.push_back(co.members[i]);
          o.id += "_" + forces[co.members[i]].id;
        }
      combos.push_back(o);
    }
    coalitions.push_back(co);
  }

  RandomElection e{Catalog(forces, combos, coalitions, k), districts, {}};
  const auto& cat = e.catalog;

  // National strength per party: one dominant party with probability 1/2.
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> strength(static_cast<std::size_t>(P));
  for (double& s : strength) s = g(rng) + 0.01;
  if (u(rng) < 0.5) strength[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, P - 1)(rng))] *= 6.0;
  std::vector<bool> ind_runs(static_cast<std::size_t>(I) * districts.size());
  for (std::size_t i = 0; i < ind_runs.size(); ++i) ind_runs[i] = u(rng) < 0.1;

  std::lognormal_distribution<double> noise(0.0, 0.5);
  std::uniform_int_distribution<int> size_dist(2000, 20000);
  for (std::size_t d = 0; d < districts.size(); ++d) {
    std::vector<std::int64_t> row(cat.num_options(), 0);
    const double size = size_dist(rng);
    std::vector<double> w(cat.num_options(), 0.0);
    for (std::size_t o = 0; o < cat.num_ballot_options(); ++o) {
      const auto& opt = cat.option(o);
      const ForceIndex f0 = opt.composition.front();
      double base;
      if (opt.is_combination()) {
        const auto c = cat.coalition_of(f0);
        if (!cat.coalitions()[*c].registered_in(districts[d])) continue;
        base = 0.05 * strength[f0];
      } else if (cat.is_party(f0)) {
        base = strength[f0];
      } else if (cat.is_independent(f0)) {
        const std::size_t i = f0 - static_cast<std::size_t>(P);
        if (!ind_runs[i * districts.size() + d]) continue;
        base = 0.8;
      } else {
        base = 0.03;
      }
      w[o] = base * noise(rng);
    }
    double total = 0.0;
    for (double x : w) total += x;
    for (std::size_t o = 0; o < cat.num_ballot_options(); ++o)
      row[o] = static_cast<std::int64_t>(std::floor(size * w[o] / total));
    // occasional exact tie between the two largest single options
    if (u(rng) < 0.05 && P >= 2) row[1] = row[0];
    row[cat.abstention_option()] = static_cast<std::int64_t>(size * 0.4);
    e.votes.push_back(row);
  }
  return e;
}

}  // namespace qc_oracle
