#pragma once

// Clustering hierarchy of strata from historic profiles, and imputation of
// sufficient statistics for strata without sample data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quickcount/bayes.hpp"
#include "quickcount/errors.hpp"

namespace quickcount {

struct StratumProfile {
  int stratum = 0;
  std::vector<double> features;
};

/// Historic totals of one stratum: votes per column and the nominal list.
struct HistoricStratum {
  int stratum = 0;
  std::vector<double> votes;
  double nominal_list = 0.0;
};

/// Vote share per column plus turnout (votes cast over nominal list).
inline std::vector<StratumProfile> historic_profiles(const std::vector<HistoricStratum>& historic) {
  std::vector<StratumProfile> out;
  out.reserve(historic.size());
  for (const auto& h : historic) {
    const double cast = std::accumulate(h.votes.begin(), h.votes.end(), 0.0);
    if (!(cast > 0.0)) throw InputError("historic stratum " + std::to_string(h.stratum) + " has no votes");
    if (!(h.nominal_list > 0.0)) throw InputError("historic stratum " + std::to_string(h.stratum) + " has no nominal list");
    StratumProfile p{h.stratum, {}};
    for (double v : h.votes) p.features.push_back(v / cast);
    p.features.push_back(cast / h.nominal_list);
    out.push_back(std::move(p));
  }
  return out;
}

/// Nested partitions of the strata, one per k. labels[i][h] is the group of
/// stratum h (in `strata` order) in the partition with ks[i] groups; groups
/// are numbered by their first stratum.
struct ClusteringHierarchy {
  std::vector<int> strata;
  std::vector<int> ks;  // ascending
  std::vector<std::vector<int>> labels;

  std::size_t num_strata() const { return strata.size(); }
  std::optional<std::size_t> stratum_index(int id) const {
    auto it = std::find(strata.begin(), strata.end(), id);
    if (it == strata.end()) return std::nullopt;
    return static_cast<std::size_t>(it - strata.begin());
  }
  /// Strata indices in the same group as h at level i.
  std::vector<std::size_t> group(std::size_t level, std::size_t h) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < strata.size(); ++g)
      if (labels[level][g] == labels[level][h]) out.push_back(g);
    return out;
  }
};

inline const std::vector<int>& default_cut_levels() {
  static const std::vector<int> k{1, 10, 20, 50, 100, 200, 300};
  return k;
}

/// Agglomerative clustering with complete linkage on the Euclidean distance
/// between standardized profiles (zero mean, unit sample variance per
/// feature), strata taken in ascending id order. Features with zero variance are dropped and reported in
/// `warnings`. Equal merge distances are resolved by the smallest pair of
/// cluster ids, a cluster's id being its smallest stratum position. Levels
/// outside [1, L] are ignored; 1 and L are always present.
inline ClusteringHierarchy build_hierarchy(std::vector<StratumProfile> profiles, std::vector<int> k_list,
                                           std::vector<std::string>* warnings = nullptr) {
  std::sort(profiles.begin(), profiles.end(),
            [](const StratumProfile& a, const StratumProfile& b) { return a.stratum < b.stratum; });
  const std::size_t L = profiles.size();
  if (L == 0) throw InputError("no stratum profiles");
  const std::size_t F = profiles.front().features.size();
  ClusteringHierarchy out;
  for (const auto& p : profiles) {
    if (p.features.size() != F) throw InputError("profiles have different feature counts");
    for (double x : p.features)
      if (!std::isfinite(x)) throw InputError("non-finite feature in stratum " + std::to_string(p.stratum));
    out.strata.push_back(p.stratum);
  }
  if (std::adjacent_find(out.strata.begin(), out.strata.end()) != out.strata.end())
    throw InputError("duplicate stratum profile");

  // standardize
  std::vector<std::vector<double>> z(L);
  for (std::size_t f = 0; f < F; ++f) {
    double mean = 0.0;
    for (const auto& p : profiles) mean += p.features[f];
    mean /= static_cast<double>(L);
    double ss = 0.0;
    for (const auto& p : profiles) ss += (p.features[f] - mean) * (p.features[f] - mean);
    const double sd = L > 1 ? std::sqrt(ss / static_cast<double>(L - 1)) : 0.0;
    if (!(sd > 0.0)) {
      if (warnings) warnings->push_back("feature " + std::to_string(f) + " is constant across strata and was dropped");
      continue;
    }
    for (std::size_t h = 0; h < L; ++h) z[h].push_back((profiles[h].features[f] - mean) / sd);
  }

  std::vector<double> dist(L * L, 0.0);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a + 1; b < L; ++b) {
      double s = 0.0;
      for (std::size_t f = 0; f < z[a].size(); ++f) s += (z[a][f] - z[b][f]) * (z[a][f] - z[b][f]);
      dist[a * L + b] = dist[b * L + a] = std::sqrt(s);
    }

  k_list.push_back(1);
  k_list.push_back(static_cast<int>(L));
  std::erase_if(k_list, [&](int k) { return k < 1 || k > static_cast<int>(L); });
  std::sort(k_list.begin(), k_list.end());
  k_list.erase(std::unique(k_list.begin(), k_list.end()), k_list.end());
  out.ks = k_list;
  out.labels.assign(k_list.size(), {});

  // cluster of each stratum, identified by its smallest member
  std::vector<std::size_t> owner(L);
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  std::vector<bool> alive(L, true);

  auto record = [&](std::size_t clusters) {
    for (std::size_t i = 0; i < out.ks.size(); ++i) {
      if (static_cast<std::size_t>(out.ks[i]) != clusters) continue;
      std::map<std::size_t, int> number;
      auto& lab = out.labels[i];
      lab.resize(L);
      for (std::size_t h = 0; h < L; ++h) {
        auto [it, fresh] = number.emplace(owner[h], static_cast<int>(number.size()));
        lab[h] = it->second;
      }
    }
  };

  record(L);
  for (std::size_t clusters = L; clusters > 1; --clusters) {
    std::size_t ba = L, bb = L;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < L; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < L; ++b) {
        if (!alive[b]) continue;
        if (dist[a * L + b] < best) {
          best = dist[a * L + b];
          ba = a;
          bb = b;
        }
      }
    }
    // merge bb into ba; complete linkage keeps the larger distance
    for (std::size_t c = 0; c < L; ++c) {
      if (!alive[c] || c == ba || c == bb) continue;
      const double d = std::max(dist[ba * L + c], dist[bb * L + c]);
      dist[ba * L + c] = dist[c * L + ba] = d;
    }
    alive[bb] = false;
    for (auto& o : owner)
      if (o == bb) o = ba;
    record(clusters - 1);
  }
  return out;
}

/// The largest level whose group containing stratum h (by position) has a
/// stratum with data. Returns the level index and the data-bearing members.
inline std::pair<std::size_t, std::vector<std::size_t>> find_kstar(const ClusteringHierarchy& hierarchy, std::size_t h,
                                                                   const std::vector<bool>& has_data) {
  if (has_data.size() != hierarchy.num_strata()) throw InputError("data flags do not match the hierarchy");
  for (std::size_t i = hierarchy.ks.size(); i-- > 0;) {
    std::vector<std::size_t> with;
    for (std::size_t g : hierarchy.group(i, h))
      if (has_data[g]) with.push_back(g);
    if (!with.empty()) return {i, with};
  }
  throw EstimationError("no stratum has sample data; nothing to impute from");
}

/// Fills every stratum without data with group averages from the finest
/// level that has data: T = l0 * sum T' / sum v', U = l0 * sum U' / sum v',
/// n = 1, v = l0. Strata with at least one station are left as they are.
/// `stats` must follow the hierarchy's stratum order.
inline std::vector<StratumStats> impute_missing_strata(std::vector<StratumStats> stats,
                                                       const ClusteringHierarchy& hierarchy, double l0 = 750.0) {
  if (stats.size() != hierarchy.num_strata()) throw InputError("statistics do not match the hierarchy");
  for (std::size_t h = 0; h < stats.size(); ++h)
    if (stats[h].stratum != hierarchy.strata[h]) throw InputError("statistics are not in hierarchy stratum order");
  std::vector<bool> has_data(stats.size());
  for (std::size_t h = 0; h < stats.size(); ++h) has_data[h] = stats[h].has_data() && !stats[h].imputed;

  const auto observed = stats;
  for (std::size_t h = 0; h < stats.size(); ++h) {
    if (has_data[h]) continue;
    auto [level, donors] = find_kstar(hierarchy, h, has_data);
    (void)level;
    double v = 0.0;
    for (std::size_t g : donors) v += observed[g].v;
    if (!(v > 0.0)) throw EstimationError("donor strata have no nominal list");
    auto& s = stats[h];
    const std::size_t J = observed[donors.front()].T.size();
    s.T.assign(J, 0.0);
    s.U.assign(J, 0.0);
    for (std::size_t g : donors)
      for (std::size_t j = 0; j < J; ++j) {
        s.T[j] += observed[g].T[j];
        s.U[j] += observed[g].U[j];
      }
    for (std::size_t j = 0; j < J; ++j) {
      s.T[j] = l0 * s.T[j] / v;
      s.U[j] = l0 * s.U[j] / v;
    }
    s.n = 1;
    s.v = l0;
    s.imputed = true;
  }
  return stats;
}

}  // namespace quickcount
