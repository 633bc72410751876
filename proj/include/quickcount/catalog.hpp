#pragma once

// Electoral universe: political forces, coalitions, valid voting options and
// the statutory constants, plus the coalition vote arithmetic.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quickcount/errors.hpp"

namespace quickcount {

using ForceIndex = std::size_t;
using OptionIndex = std::size_t;
using CoalitionIndex = std::size_t;

enum class ForceKind { party, independent, null_unregistered, abstention };

inline std::string_view to_string(ForceKind kind) {
  switch (kind) {
    case ForceKind::party: return "party";
    case ForceKind::independent: return "independent";
    case ForceKind::null_unregistered: return "null_unregistered";
    case ForceKind::abstention: return "abstention";
  }
  return "?";
}

inline ForceKind parse_force_kind(std::string_view s) {
  if (s == "party") return ForceKind::party;
  if (s == "independent") return ForceKind::independent;
  if (s == "null_unregistered" || s == "null") return ForceKind::null_unregistered;
  if (s == "abstention") return ForceKind::abstention;
  throw CatalogError("unknown force kind '" + std::string(s) + "'");
}

struct PoliticalForce {
  std::string id;
  ForceKind kind = ForceKind::party;
};

/// A valid way of marking the ballot. Composition is sorted by force index.
struct VotingOption {
  std::string id;
  std::vector<ForceIndex> composition;

  bool is_combination() const { return composition.size() >= 2; }
};

struct Coalition {
  std::string id;
  std::vector<ForceIndex> members;  // sorted
  /// district -> seat holder. default_holder ("*" in config files) covers
  /// every district without an explicit entry.
  std::map<int, ForceIndex> seat_agreement;
  std::optional<ForceIndex> default_holder;

  bool registered_in(int district) const {
    return default_holder.has_value() || seat_agreement.contains(district);
  }
  ForceIndex seat_holder(int district) const {
    if (auto it = seat_agreement.find(district); it != seat_agreement.end()) return it->second;
    if (default_holder) return *default_holder;
    throw CatalogError("coalition " + id + " has no candidate in district " + std::to_string(district));
  }
};

struct ElectoralConstants {
  int total_seats = 500;
  int majority_seats = 300;
  int pr_seats = 200;
  int seat_cap = 300;
  double overrepresentation_margin = 0.08;
  double threshold = 0.03;
  int max_nominal_list = 750;

  void validate() const {
    if (total_seats != majority_seats + pr_seats)
      throw CatalogError("total_seats must equal majority_seats + pr_seats");
    if (majority_seats < 1 || pr_seats < 0 || seat_cap < 1)
      throw CatalogError("seat counts must be positive");
    auto fraction = [](double x) { return x > 0.0 && x < 1.0; };
    if (!fraction(overrepresentation_margin) || !fraction(threshold))
      throw CatalogError("margin and threshold must lie in (0,1)");
    if (max_nominal_list < 1) throw CatalogError("max_nominal_list must be >= 1");
  }
};

class Catalog {
 public:
  Catalog() = default;

  /// Builds and validates a catalog. Single-force options are added for every
  /// party, independent and the null category; `combinations` lists the
  /// multi-party options. The abstention option is always last and is never
  /// read from vote files.
  Catalog(std::vector<PoliticalForce> forces, std::vector<VotingOption> combinations,
          std::vector<Coalition> coalitions, ElectoralConstants constants)
      : forces_(std::move(forces)), coalitions_(std::move(coalitions)), constants_(constants) {
    constants_.validate();
    for (ForceIndex f = 0; f < forces_.size(); ++f) {
      if (!force_by_id_.emplace(forces_[f].id, f).second)
        throw CatalogError("duplicate force id '" + forces_[f].id + "'");
      switch (forces_[f].kind) {
        case ForceKind::null_unregistered:
          if (null_force_) throw CatalogError("more than one null_unregistered force");
          null_force_ = f;
          break;
        case ForceKind::abstention:
          if (abstention_force_) throw CatalogError("more than one abstention force");
          abstention_force_ = f;
          break;
        default: break;
      }
    }
    if (!null_force_) throw CatalogError("catalog needs exactly one null_unregistered force");
    if (!abstention_force_) throw CatalogError("catalog needs exactly one abstention force");

    single_option_.assign(forces_.size(), std::nullopt);
    for (ForceIndex f = 0; f < forces_.size(); ++f) {
      if (f == *abstention_force_) continue;
      add_option(VotingOption{forces_[f].id, {f}});
    }
    coalition_of_.assign(forces_.size(), std::nullopt);
    for (CoalitionIndex c = 0; c < coalitions_.size(); ++c) {
      auto& co = coalitions_[c];
      std::sort(co.members.begin(), co.members.end());
      if (co.members.size() < 2) throw CatalogError("coalition " + co.id + " needs >= 2 members");
      if (std::adjacent_find(co.members.begin(), co.members.end()) != co.members.end())
        throw CatalogError("coalition " + co.id + " repeats a member");
      for (ForceIndex m : co.members) {
        check_force(m);
        if (forces_[m].kind != ForceKind::party)
          throw CatalogError("coalition " + co.id + " member " + forces_[m].id + " is not a party");
        if (coalition_of_[m]) throw CatalogError("party " + forces_[m].id + " is in two coalitions");
        coalition_of_[m] = c;
      }
      auto is_member = [&](ForceIndex f) {
        return std::binary_search(co.members.begin(), co.members.end(), f);
      };
      if (co.default_holder && !is_member(*co.default_holder))
        throw CatalogError("coalition " + co.id + " seat holder is not a member");
      for (const auto& [district, holder] : co.seat_agreement)
        if (!is_member(holder))
          throw CatalogError("coalition " + co.id + " seat holder in district " +
                             std::to_string(district) + " is not a member");
    }
    for (auto& opt : combinations) {
      std::sort(opt.composition.begin(), opt.composition.end());
      if (!opt.is_combination())
        throw CatalogError("option " + opt.id + " must combine two or more parties");
      std::set<std::size_t> owners;
      for (ForceIndex f : opt.composition) {
        check_force(f);
        if (!coalition_of_[f])
          throw CatalogError("option " + opt.id + " includes " + forces_[f].id + " outside any coalition");
        owners.insert(*coalition_of_[f]);
      }
      if (owners.size() != 1)
        throw CatalogError("option " + opt.id + " spans more than one coalition");
      add_option(std::move(opt));
    }
    add_option(VotingOption{forces_[*abstention_force_].id, {*abstention_force_}});
  }

  static Catalog from_json(const nlohmann::json& doc) {
    std::vector<PoliticalForce> forces;
    for (const auto& f : doc.at("forces"))
      forces.push_back({f.at("id").get<std::string>(), parse_force_kind(f.at("kind").get<std::string>())});
    std::unordered_map<std::string, ForceIndex> ids;
    for (ForceIndex i = 0; i < forces.size(); ++i) ids.emplace(forces[i].id, i);
    auto lookup = [&](const std::string& id) {
      auto it = ids.find(id);
      if (it == ids.end()) throw CatalogError("unknown force id '" + id + "'");
      return it->second;
    };

    std::vector<Coalition> coalitions;
    if (doc.contains("coalitions")) {
      for (const auto& c : doc.at("coalitions")) {
        Coalition co;
        co.id = c.at("id").get<std::string>();
        for (const auto& m : c.at("members")) co.members.push_back(lookup(m.get<std::string>()));
        if (c.contains("seat_agreement")) {
          for (const auto& [key, holder] : c.at("seat_agreement").items()) {
            const ForceIndex h = lookup(holder.get<std::string>());
            if (key == "*") {
              co.default_holder = h;
            } else {
              co.seat_agreement[std::stoi(key)] = h;
            }
          }
        }
        coalitions.push_back(std::move(co));
      }
    }

    std::vector<VotingOption> combos;
    if (doc.contains("options")) {
      for (const auto& o : doc.at("options")) {
        VotingOption opt{o.at("id").get<std::string>(), {}};
        for (const auto& m : o.at("composition")) opt.composition.push_back(lookup(m.get<std::string>()));
        combos.push_back(std::move(opt));
      }
    }

    ElectoralConstants k;
    if (doc.contains("constants")) {
      const auto& c = doc.at("constants");
      k.total_seats = c.value("total_seats", k.total_seats);
      k.majority_seats = c.value("majority_seats", k.majority_seats);
      k.pr_seats = c.value("pr_seats", k.pr_seats);
      k.seat_cap = c.value("seat_cap", k.seat_cap);
      k.overrepresentation_margin = c.value("overrepresentation_margin", k.overrepresentation_margin);
      k.threshold = c.value("threshold", k.threshold);
      k.max_nominal_list = c.value("max_nominal_list", k.max_nominal_list);
    }

    Catalog cat(std::move(forces), std::move(combos), std::move(coalitions), k);
    if (doc.contains("mi_predictors")) {
      std::vector<ForceIndex> preds;
      for (const auto& p : doc.at("mi_predictors")) preds.push_back(lookup(p.get<std::string>()));
      cat.set_mi_predictors(std::move(preds));
    }
    return cat;
  }

  static Catalog load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open catalog file " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("catalog " + path + ": " + e.what());
    }
    try {
      return from_json(doc);
    } catch (const nlohmann::json::exception& e) {
      throw CatalogError("catalog " + path + ": " + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json doc;
    for (const auto& f : forces_) doc["forces"].push_back({{"id", f.id}, {"kind", to_string(f.kind)}});
    doc["options"] = nlohmann::json::array();
    for (const auto& o : options_) {
      if (!o.is_combination()) continue;
      nlohmann::json comp = nlohmann::json::array();
      for (ForceIndex f : o.composition) comp.push_back(forces_[f].id);
      doc["options"].push_back({{"id", o.id}, {"composition", comp}});
    }
    doc["coalitions"] = nlohmann::json::array();
    for (const auto& c : coalitions_) {
      nlohmann::json members = nlohmann::json::array();
      for (ForceIndex m : c.members) members.push_back(forces_[m].id);
      nlohmann::json agreement = nlohmann::json::object();
      if (c.default_holder) agreement["*"] = forces_[*c.default_holder].id;
      for (const auto& [d, h] : c.seat_agreement) agreement[std::to_string(d)] = forces_[h].id;
      doc["coalitions"].push_back({{"id", c.id}, {"members", members}, {"seat_agreement", agreement}});
    }
    doc["constants"] = {{"total_seats", constants_.total_seats},
                        {"majority_seats", constants_.majority_seats},
                        {"pr_seats", constants_.pr_seats},
                        {"seat_cap", constants_.seat_cap},
                        {"overrepresentation_margin", constants_.overrepresentation_margin},
                        {"threshold", constants_.threshold},
                        {"max_nominal_list", constants_.max_nominal_list}};
    if (!mi_predictors_.empty()) {
      for (ForceIndex f : mi_predictors_) doc["mi_predictors"].push_back(forces_[f].id);
    }
    return doc;
  }

  std::size_t num_forces() const { return forces_.size(); }
  const std::vector<PoliticalForce>& forces() const { return forces_; }
  const PoliticalForce& force(ForceIndex f) const { return forces_.at(f); }
  ForceIndex force_index(std::string_view id) const {
    auto it = force_by_id_.find(std::string(id));
    if (it == force_by_id_.end()) throw CatalogError("unknown force id '" + std::string(id) + "'");
    return it->second;
  }

  std::size_t num_options() const { return options_.size(); }
  /// Options read from vote files: every option except the derived abstention one.
  std::size_t num_ballot_options() const { return options_.size() - 1; }
  const std::vector<VotingOption>& options() const { return options_; }
  const VotingOption& option(OptionIndex o) const { return options_.at(o); }
  std::optional<OptionIndex> find_option(std::string_view id) const {
    auto it = option_by_id_.find(std::string(id));
    if (it == option_by_id_.end()) return std::nullopt;
    return it->second;
  }
  OptionIndex abstention_option() const { return options_.size() - 1; }
  std::optional<OptionIndex> single_option(ForceIndex f) const { return single_option_.at(f); }

  const std::vector<Coalition>& coalitions() const { return coalitions_; }
  std::optional<CoalitionIndex> coalition_of(ForceIndex f) const { return coalition_of_.at(f); }

  ForceIndex null_force() const { return *null_force_; }
  ForceIndex abstention_force() const { return *abstention_force_; }
  bool is_party(ForceIndex f) const { return forces_[f].kind == ForceKind::party; }
  bool is_independent(ForceIndex f) const { return forces_[f].kind == ForceKind::independent; }
  /// Parties and independents: the forces whose votes count as valid.
  bool is_candidate(ForceIndex f) const { return is_party(f) || is_independent(f); }

  const ElectoralConstants& constants() const { return constants_; }
  void set_constants(const ElectoralConstants& k) {
    k.validate();
    constants_ = k;
  }

  const std::vector<ForceIndex>& mi_predictors() const { return mi_predictors_; }
  void set_mi_predictors(std::vector<ForceIndex> preds) {
    for (ForceIndex f : preds) {
      check_force(f);
      if (!single_option_[f]) throw CatalogError("predictor " + forces_[f].id + " has no ballot option");
    }
    mi_predictors_ = std::move(preds);
  }

 private:
  void check_force(ForceIndex f) const {
    if (f >= forces_.size()) throw CatalogError("force index out of range");
  }
  void add_option(VotingOption opt) {
    if (!option_by_id_.emplace(opt.id, options_.size()).second)
      throw CatalogError("duplicate option id '" + opt.id + "'");
    if (opt.composition.size() == 1) single_option_[opt.composition.front()] = options_.size();
    options_.push_back(std::move(opt));
  }

  std::vector<PoliticalForce> forces_;
  std::vector<VotingOption> options_;
  std::vector<Coalition> coalitions_;
  ElectoralConstants constants_;
  std::unordered_map<std::string, ForceIndex> force_by_id_;
  std::unordered_map<std::string, OptionIndex> option_by_id_;
  std::vector<std::optional<OptionIndex>> single_option_;
  std::vector<std::optional<CoalitionIndex>> coalition_of_;
  std::optional<ForceIndex> null_force_;
  std::optional<ForceIndex> abstention_force_;
  std::vector<ForceIndex> mi_predictors_;
};

template <class T>
concept VoteCount = std::integral<T> || std::floating_point<T>;

/// Individual (single-option) votes per force for one district row of
/// option totals. Forces without a single option get 0.
template <VoteCount T>
std::vector<T> individual_totals(const Catalog& catalog, std::span<const T> option_row) {
  std::vector<T> out(catalog.num_forces(), T{0});
  for (ForceIndex f = 0; f < catalog.num_forces(); ++f)
    if (auto o = catalog.single_option(f); o && *o < option_row.size()) out[f] = option_row[*o];
  return out;
}

/// Shares an option's votes among its composition. Combinations are split in
/// equal integer shares and the remainder goes to the member with the most
/// individual votes (ties: lowest force index). For floating-point vote
/// estimates the same floor/remainder rule is applied to real numbers.
template <VoteCount T>
std::vector<std::pair<ForceIndex, T>> split_combination_votes(const Catalog& catalog, OptionIndex option,
                                                              T votes, std::span<const T> individual) {
  const auto& opt = catalog.option(option);
  if (votes < T{0}) throw InputError("negative vote count for option " + opt.id);
  if (!opt.is_combination()) return {{opt.composition.front(), votes}};
  for (ForceIndex f : opt.composition)
    if (f >= individual.size())
      throw CatalogError("individual totals missing for " + catalog.force(f).id);

  const auto k = static_cast<T>(opt.composition.size());
  T share;
  if constexpr (std::integral<T>) {
    share = votes / k;
  } else {
    share = std::floor(votes / k);
  }
  const T remainder = votes - share * k;
  ForceIndex lead = opt.composition.front();
  for (ForceIndex f : opt.composition)
    if (individual[f] > individual[lead]) lead = f;

  std::vector<std::pair<ForceIndex, T>> out;
  out.reserve(opt.composition.size());
  for (ForceIndex f : opt.composition) out.emplace_back(f, f == lead ? share + remainder : share);
  return out;
}

/// Converts one row of option totals into force totals (length num_forces),
/// applying the coalition split for every combination option.
template <VoteCount T>
void split_into_forces(const Catalog& catalog, std::span<const T> option_row, std::span<T> force_row) {
  if (option_row.size() != catalog.num_options() || force_row.size() != catalog.num_forces())
    throw InputError("option/force row width does not match catalog");
  std::fill(force_row.begin(), force_row.end(), T{0});
  const auto individual = individual_totals<T>(catalog, option_row);
  for (OptionIndex o = 0; o < catalog.num_options(); ++o) {
    const auto& opt = catalog.option(o);
    if (!opt.is_combination()) {
      force_row[opt.composition.front()] += option_row[o];
      continue;
    }
    for (const auto& [f, v] : split_combination_votes<T>(catalog, o, option_row[o], individual))
      force_row[f] += v;
  }
}

/// Sum of all options whose composition lies inside the coalition.
template <VoteCount T>
T coalition_district_total(const Catalog& catalog, CoalitionIndex c, std::span<const T> option_row) {
  const auto& members = catalog.coalitions().at(c).members;
  T total{0};
  for (OptionIndex o = 0; o < catalog.num_options() && o < option_row.size(); ++o) {
    const auto& comp = catalog.option(o).composition;
    const bool inside = std::all_of(comp.begin(), comp.end(), [&](ForceIndex f) {
      return std::binary_search(members.begin(), members.end(), f);
    });
    if (inside) total += option_row[o];
  }
  return total;
}

}  // namespace quickcount
