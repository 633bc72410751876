#pragma once

// Population frame, station returns and stratified samples.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/table.hpp"

namespace quickcount {

/// Stations are identified by (stratum, running index within the stratum).
struct StationKey {
  int stratum = 0;
  std::int64_t station = 0;
  auto operator<=>(const StationKey&) const = default;
};

inline std::string to_string(const StationKey& k) {
  return std::to_string(k.stratum) + "/" + std::to_string(k.station);
}

struct StationInfo {
  StationKey key;
  int nominal_list = 0;
  bool urban = true;
  std::string state;
  int tz_offset = 0;  // hours relative to the reference time zone (negative = west)
  bool in_sample = false;
};

class Frame {
 public:
  Frame() = default;
  explicit Frame(std::vector<StationInfo> stations, int max_nominal_list = 750) : stations_(std::move(stations)) {
    std::sort(stations_.begin(), stations_.end(),
              [](const StationInfo& a, const StationInfo& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < stations_.size(); ++i) {
      const auto& s = stations_[i];
      if (i > 0 && stations_[i - 1].key == s.key) throw InputError("duplicate station " + to_string(s.key));
      if (s.nominal_list < 1 || s.nominal_list > max_nominal_list)
        throw InputError("nominal list of station " + to_string(s.key) + " outside [1, " +
                         std::to_string(max_nominal_list) + "]");
      if (strata_.empty() || strata_.back() != s.key.stratum) {
        strata_.push_back(s.key.stratum);
        members_.emplace_back();
      }
      members_.back().push_back(i);
      index_.emplace(s.key, i);
    }
    nominal_.assign(strata_.size(), 0.0);
    planned_.assign(strata_.size(), 0);
    for (std::size_t h = 0; h < strata_.size(); ++h)
      for (std::size_t i : members_[h]) {
        nominal_[h] += stations_[i].nominal_list;
        if (stations_[i].in_sample) ++planned_[h];
      }
  }

  const std::vector<StationInfo>& stations() const { return stations_; }
  std::size_t num_strata() const { return strata_.size(); }
  /// External stratum (district) ids in ascending order.
  const std::vector<int>& strata() const { return strata_; }
  std::optional<std::size_t> stratum_index(int stratum_id) const {
    auto it = std::lower_bound(strata_.begin(), strata_.end(), stratum_id);
    if (it == strata_.end() || *it != stratum_id) return std::nullopt;
    return static_cast<std::size_t>(it - strata_.begin());
  }
  std::size_t require_stratum(int stratum_id) const {
    auto h = stratum_index(stratum_id);
    if (!h) throw InputError("unknown stratum " + std::to_string(stratum_id));
    return *h;
  }
  const std::vector<std::size_t>& stations_in(std::size_t h) const { return members_.at(h); }
  std::size_t population_size(std::size_t h) const { return members_.at(h).size(); }
  std::size_t population_size() const { return stations_.size(); }
  /// l_h: nominal list of every installed station in the stratum.
  double nominal_list(std::size_t h) const { return nominal_.at(h); }
  double nominal_list() const { return std::accumulate(nominal_.begin(), nominal_.end(), 0.0); }
  /// Planned sample size n_h (stations flagged in_sample).
  std::size_t planned_size(std::size_t h) const { return planned_.at(h); }
  std::size_t planned_size() const { return std::accumulate(planned_.begin(), planned_.end(), std::size_t{0}); }

  std::optional<std::size_t> find(const StationKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const StationInfo& station(std::size_t i) const { return stations_.at(i); }

  /// Marks exactly the given stations as the planned sample.
  void set_planned_sample(const std::vector<StationKey>& keys) {
    for (auto& s : stations_) s.in_sample = false;
    std::fill(planned_.begin(), planned_.end(), 0);
    for (const auto& k : keys) {
      auto i = find(k);
      if (!i) throw InputError("planned station " + to_string(k) + " not in frame");
      if (stations_[*i].in_sample) continue;
      stations_[*i].in_sample = true;
      ++planned_[require_stratum(k.stratum)];
    }
  }

 private:
  std::vector<StationInfo> stations_;
  std::vector<int> strata_;
  std::vector<std::vector<std::size_t>> members_;
  std::map<StationKey, std::size_t> index_;
  std::vector<double> nominal_;
  std::vector<std::size_t> planned_;
};

/// One station's votes per ballot option; std::nullopt marks a missing cell.
struct StationReturn {
  StationKey key;
  int nominal_list = 0;
  std::vector<std::optional<std::int64_t>> votes;

  bool complete() const {
    return std::all_of(votes.begin(), votes.end(), [](const auto& v) { return v.has_value(); });
  }
  std::int64_t ballots() const {
    std::int64_t sum = 0;
    for (const auto& v : votes) sum += v.value_or(0);
    return sum;
  }
  /// Derived abstentions: nominal list minus ballots cast, clamped at zero.
  std::int64_t abstentions() const { return std::max<std::int64_t>(0, nominal_list - ballots()); }
};

/// Full option row (ballot options + derived abstention) of a complete return.
inline std::vector<double> option_row(const Catalog& catalog, const StationReturn& r) {
  if (r.votes.size() != catalog.num_ballot_options())
    throw InputError("station " + to_string(r.key) + " has " + std::to_string(r.votes.size()) + " vote cells, expected " +
                     std::to_string(catalog.num_ballot_options()));
  std::vector<double> row(catalog.num_options(), 0.0);
  for (std::size_t o = 0; o < r.votes.size(); ++o) {
    if (!r.votes[o]) throw InputError("station " + to_string(r.key) + " has a missing vote cell");
    if (*r.votes[o] < 0) throw InputError("station " + to_string(r.key) + " has a negative vote count");
    row[o] = static_cast<double>(*r.votes[o]);
  }
  row[catalog.abstention_option()] = static_cast<double>(r.abstentions());
  return row;
}

/// Checks a return against the frame and catalog: known station, matching
/// width, non-negative counts, ballots not above the nominal list.
inline void validate_return(const Catalog& catalog, const Frame& frame, const StationReturn& r) {
  if (!frame.find(r.key)) throw InputError("station " + to_string(r.key) + " is not in the frame");
  if (r.votes.size() != catalog.num_ballot_options())
    throw InputError("station " + to_string(r.key) + " has the wrong number of vote cells");
  for (const auto& v : r.votes)
    if (v && *v < 0) throw InputError("station " + to_string(r.key) + " has a negative vote count");
  if (r.complete() && r.ballots() > r.nominal_list)
    throw InputError("station " + to_string(r.key) + " has more ballots than its nominal list");
}

/// The rows of one stratum of a complete sample.
struct StratumSample {
  int stratum = 0;
  std::size_t population_size = 0;  // N_h
  Table rows;                       // stations x options (abstention included)
  std::vector<double> nominal;      // l_{h,r} per row
};

/// Groups complete returns by frame stratum; strata without returns come back empty.
inline std::vector<StratumSample> group_by_stratum(const Catalog& catalog, const Frame& frame,
                                                   const std::vector<StationReturn>& returns) {
  std::vector<StratumSample> out(frame.num_strata());
  for (std::size_t h = 0; h < frame.num_strata(); ++h) {
    out[h].stratum = frame.strata()[h];
    out[h].population_size = frame.population_size(h);
    out[h].rows = Table(0, catalog.num_options());
  }
  for (const auto& r : returns) {
    const std::size_t h = frame.require_stratum(r.key.stratum);
    out[h].rows.append_row(option_row(catalog, r));
    out[h].nominal.push_back(r.nominal_list);
  }
  return out;
}

/// Expansion estimator (N_h / n_h) * sum of the sample, per option.
inline std::vector<double> stratum_estimator(const Table& rows, std::size_t population_size) {
  if (rows.rows() == 0) throw MissingStratumError("stratum has no returns");
  auto totals = rows.column_sums();
  const double factor = static_cast<double>(population_size) / static_cast<double>(rows.rows());
  for (double& t : totals) t *= factor;
  return totals;
}

/// Expansion-estimated option totals for every stratum (rows follow frame order).
inline Table estimate_totals(const std::vector<StratumSample>& sample) {
  if (sample.empty()) return {};
  Table out(sample.size(), sample.front().rows.cols());
  for (std::size_t h = 0; h < sample.size(); ++h) {
    if (sample[h].rows.rows() == 0)
      throw MissingStratumError("stratum " + std::to_string(sample[h].stratum) + " has no returns");
    const auto t = stratum_estimator(sample[h].rows, sample[h].population_size);
    std::copy(t.begin(), t.end(), out.row(h).begin());
  }
  return out;
}

/// Per-stratum option totals of a full population (rows in frame order).
inline Table population_totals(const Catalog& catalog, const Frame& frame, const std::vector<StationReturn>& pop) {
  Table t(frame.num_strata(), catalog.num_options());
  for (const auto& r : pop) {
    const auto row = option_row(catalog, r);
    auto dst = t.row(frame.require_stratum(r.key.stratum));
    for (std::size_t o = 0; o < row.size(); ++o) dst[o] += row[o];
  }
  return t;
}

/// Stratified SRSWOR: n_h stations from each stratum, independently, with
/// stratum h drawn from its own stream of `seed`. `population` is aligned
/// with frame.stations(). Returned stations are grouped by stratum.
inline std::vector<StationReturn> draw_sample(const Frame& frame, const std::vector<StationReturn>& population,
                                              const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (population.size() != frame.population_size()) throw InputError("population not aligned with frame");
  if (sizes.size() != frame.num_strata()) throw DesignError("one sample size per stratum required");
  std::vector<StationReturn> out;
  for (std::size_t h = 0; h < frame.num_strata(); ++h) {
    const auto& members = frame.stations_in(h);
    if (sizes[h] > members.size())
      throw DesignError("n_h = " + std::to_string(sizes[h]) + " exceeds N_h = " + std::to_string(members.size()) +
                        " in stratum " + std::to_string(frame.strata()[h]));
    auto idx = members;
    auto rng = make_stream(seed, h);
    partial_shuffle(idx, sizes[h], rng);
    idx.resize(sizes[h]);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) out.push_back(population[i]);
  }
  return out;
}

/// Returns received so far against a planned sample of `planned` stations.
struct PartialSample {
  std::vector<StationReturn> received;
  std::size_t planned = 0;

  double fraction() const {
    return planned == 0 ? 0.0 : static_cast<double>(received.size()) / static_cast<double>(planned);
  }
  std::size_t strata_with_data(const Frame& frame) const {
    std::vector<bool> seen(frame.num_strata(), false);
    for (const auto& r : received) seen[frame.require_stratum(r.key.stratum)] = true;
    return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  }
};

}  // namespace quickcount
