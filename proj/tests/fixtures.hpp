#pragma once

#include <string>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/table.hpp"

namespace qc_test {

using namespace quickcount;

/// Parties A, B, C (A+B in a coalition with the AB combination), an
/// independent I, null N and abstention X. Force indices: A=0 B=1 C=2 I=3
/// N=4 X=5. Options: A B C I N AB X.
inline Catalog small_catalog(ElectoralConstants k = {}, int holder_district = 0, bool with_abc = false) {
  std::vector<PoliticalForce> forces{{"A", ForceKind::party},       {"B", ForceKind::party},
                                     {"C", ForceKind::party},       {"I", ForceKind::independent},
                                     {"N", ForceKind::null_unregistered}, {"X", ForceKind::abstention}};
  Coalition ab{"AB", {0, 1}, {}, ForceIndex{0}};
  if (holder_district > 0) ab.seat_agreement[holder_district] = 1;
  std::vector<Coalition> coalitions{ab};
  std::vector<VotingOption> combos{{"AB", {0, 1}}};
  if (with_abc) {
    coalitions.front().members = {0, 1, 2};
    combos.push_back({"ABC", {0, 1, 2}});
    combos.push_back({"AC", {0, 2}});
    combos.push_back({"BC", {1, 2}});
  }
  return Catalog(forces, combos, coalitions, k);
}

/// Constants for a chamber with `districts` majority seats and `pr` PR seats.
inline ElectoralConstants small_chamber(int districts, int pr, int cap) {
  ElectoralConstants k;
  k.majority_seats = districts;
  k.pr_seats = pr;
  k.total_seats = districts + pr;
  k.seat_cap = cap;
  return k;
}

/// Option row from a force-name -> votes list; unnamed options are zero.
inline std::vector<double> row_of(const Catalog& cat, std::initializer_list<std::pair<const char*, double>> votes) {
  std::vector<double> row(cat.num_options(), 0.0);
  for (const auto& [id, v] : votes) row[*cat.find_option(id)] = v;
  return row;
}

}  // namespace qc_test
