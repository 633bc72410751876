#pragma once

// Election-night replay: rebuilds the partial sample at every update of an
// arrival log and runs the Bayesian and frequentist pipelines on it. Also a
// simulator of biased arrival logs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "quickcount/bayes.hpp"
#include "quickcount/bootstrap.hpp"
#include "quickcount/catalog.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/mi.hpp"
#include "quickcount/poststrat.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampleframe.hpp"
#include "quickcount/summary.hpp"

namespace quickcount {

/// One received station; time in seconds since the Unix epoch (UTC).
struct ArrivalEvent {
  std::int64_t time = 0;
  StationReturn ret;
};

/// Events must be in non-decreasing time order.
inline void check_time_order(const std::vector<ArrivalEvent>& log) {
  for (std::size_t i = 1; i < log.size(); ++i)
    if (log[i].time < log[i - 1].time)
      throw InputError("arrival log is not in time order at event " + std::to_string(i + 1));
}

/// Arrival-delay model. Each station's delay is Gamma(shape, mean / shape)
/// minutes times exp(list * l / 750 + rural * [rural] + west * hours behind).
struct ArrivalBias {
  double mean_minutes = 90.0;
  double shape = 4.0;
  double list = 0.0;
  double rural = 0.0;
  double west = 0.0;
};

/// Arrival log for the stations of `sample`, sorted by time then station.
/// Station i of the frame draws its delay from stream i of the seed.
inline std::vector<ArrivalEvent> simulate_arrival(const Frame& frame, const std::vector<StationReturn>& sample,
                                                  const ArrivalBias& bias, std::int64_t start, std::uint64_t seed) {
  if (!(bias.mean_minutes > 0.0) || !(bias.shape > 0.0)) throw InputError("arrival delays need positive mean and shape");
  std::vector<ArrivalEvent> log;
  log.reserve(sample.size());
  std::set<StationKey> seen;
  for (const auto& r : sample) {
    const auto i = frame.find(r.key);
    if (!i) throw InputError("station " + to_string(r.key) + " is not in the frame");
    if (!seen.insert(r.key).second) throw InputError("station " + to_string(r.key) + " appears twice in the sample");
    const auto& s = frame.station(*i);
    auto rng = make_stream(seed, *i);
    std::gamma_distribution<double> delay(bias.shape, bias.mean_minutes / bias.shape);
    const double scale = std::exp(bias.list * s.nominal_list / 750.0 + (s.urban ? 0.0 : bias.rural) +
                                  bias.west * std::max(0, -s.tz_offset));
    const double seconds = std::min(delay(rng) * scale * 60.0, 1e15);
    log.push_back({start + static_cast<std::int64_t>(std::llround(seconds)), r});
  }
  std::sort(log.begin(), log.end(), [](const ArrivalEvent& a, const ArrivalEvent& b) {
    return a.time != b.time ? a.time < b.time : a.ret.key < b.ret.key;
  });
  return log;
}

struct ReplayOptions {
  std::int64_t cadence = 300;  // seconds between updates
  bool bayes = true;
  bool frequentist = true;
  std::uint64_t seed = 1;
  std::size_t draws = 10000;
  std::size_t replicates = 300;
  MiConfig mi;
  double frequentist_level = 0.95;
  double l0 = 750.0;
  unsigned workers = 1;
  std::optional<ClusteringHierarchy> hierarchy;
};

/// Rejected log event.
struct AuditRecord {
  std::int64_t time = 0;
  StationKey key;
  std::string reason;
};

struct TickSummary {
  std::size_t tick = 0;
  std::int64_t time = 0;
  std::size_t received = 0;
  std::size_t planned = 0;
  std::size_t strata_with_data = 0;
  std::size_t imputed_strata = 0;
  int bayes_level = 0;  // percent; 0 when the Bayesian path did not run
  std::vector<std::string> notes;
};

/// One interval in the series.
struct SeriesRow {
  std::size_t tick = 0;
  std::int64_t time = 0;
  std::string method;  // "bayes", "mi" or "bootstrap"
  ForceIndex force = 0;
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double point = 0.0;
};

struct ReplayResult {
  std::vector<TickSummary> ticks;
  std::vector<SeriesRow> rows;
  std::vector<AuditRecord> audit;
  std::vector<std::string> warnings;
};

/// Bayesian estimate from the returns received so far: strata without data
/// are imputed from the hierarchy, the credible level follows the received
/// fraction of the planned sample.
inline ChamberRun bayes_partial(const Catalog& catalog, const Frame& frame, const std::vector<StationReturn>& received,
                                const ReplayOptions& opt, TickSummary& tick) {
  auto stats = sufficient_stats(catalog, frame, received);
  std::size_t empty = 0;
  for (const auto& s : stats) empty += s.has_data() ? 0 : 1;
  if (empty > 0) {
    if (!opt.hierarchy)
      throw MissingStratumError(std::to_string(empty) + " strata have no data and no clustering hierarchy was given");
    stats = impute_missing_strata(std::move(stats), *opt.hierarchy, opt.l0);
  }
  tick.imputed_strata = empty;
  tick.bayes_level = tick.planned > 0 ? credibility_adjust(std::min(tick.received, tick.planned), tick.planned) : 95;
  return bayes_chamber(catalog, frame, stats, {opt.draws, opt.seed, opt.workers});
}

/// Runs both pipelines at every cadence tick (first event time plus a
/// multiple of the cadence) at which new stations arrived. Every tick uses
/// the same seed, so a tick's output depends only on the data received.
/// Events for stations outside the frame or the planned sample, and repeated
/// stations, are rejected into the audit trail.
inline ReplayResult replay(const Catalog& catalog, const Frame& frame, const std::vector<ArrivalEvent>& log,
                           const ReplayOptions& opt) {
  if (opt.cadence <= 0) throw InputError("cadence must be positive");
  check_time_order(log);
  if (opt.hierarchy && opt.hierarchy->strata != frame.strata())
    throw InputError("clustering hierarchy does not cover the frame strata");
  ReplayResult res;
  const std::size_t planned = frame.planned_size();
  if (planned == 0) res.warnings.push_back("frame has no planned sample; every frame station is accepted");

  std::vector<StationReturn> received;
  std::set<StationKey> seen;
  std::size_t next = 0, tick_index = 0;
  while (next < log.size()) {
    const std::int64_t first = log.front().time;
    const std::int64_t k = (log[next].time - first + opt.cadence - 1) / opt.cadence;
    const std::int64_t cutoff = first + k * opt.cadence;
    std::size_t added = 0;
    for (; next < log.size() && log[next].time <= cutoff; ++next) {
      const auto& ev = log[next];
      const auto idx = frame.find(ev.ret.key);
      std::string reason;
      if (!idx) reason = "unknown station";
      else if (planned > 0 && !frame.station(*idx).in_sample) reason = "station outside the planned sample";
      else if (seen.count(ev.ret.key)) reason = "station already received";
      else {
        try {
          validate_return(catalog, frame, ev.ret);
        } catch (const InputError& e) {
          reason = e.what();
        }
      }
      if (!reason.empty()) {
        res.audit.push_back({ev.time, ev.ret.key, reason});
        continue;
      }
      seen.insert(ev.ret.key);
      received.push_back(ev.ret);
      ++added;
    }
    if (added == 0) continue;

    TickSummary tick;
    tick.tick = tick_index++;
    tick.time = cutoff;
    tick.received = received.size();
    tick.planned = planned;
    PartialSample partial{received, planned};
    tick.strata_with_data = partial.strata_with_data(frame);

    auto emit = [&](const std::string& method, double level, const std::vector<SeatEstimate>& est) {
      for (const auto& e : est)
        res.rows.push_back({tick.tick, tick.time, method, e.force, level, static_cast<double>(e.interval.lower),
                            static_cast<double>(e.interval.upper), e.mean});
    };

    if (opt.bayes) {
      try {
        const auto run = bayes_partial(catalog, frame, received, opt, tick);
        const double level = tick.bayes_level / 100.0;
        emit("bayes", level, summarize_seats(catalog, run.chambers, level));
      } catch (const Error& e) {
        tick.notes.push_back(std::string("bayes: ") + e.what());
      }
    }
    if (opt.frequentist) {
      try {
        const bool complete = planned > 0 && received.size() == planned &&
                              std::all_of(received.begin(), received.end(), [](const auto& r) { return r.complete(); });
        if (complete) {
          // nothing to impute: the plain bootstrap of the full sample
          const auto run = bootstrap_chamber(catalog, group_by_stratum(catalog, frame, received),
                                             {opt.replicates, opt.seed, opt.workers});
          emit("bootstrap", opt.frequentist_level, summarize_seats(catalog, run.chambers, opt.frequentist_level));
        } else {
          MiOptions mo{opt.mi, opt.replicates, opt.seed, opt.workers, opt.frequentist_level};
          const auto mi = mi_chamber(catalog, frame, received, mo);
          for (const auto& e : mi.estimates)
            res.rows.push_back({tick.tick, tick.time, "mi", e.force, opt.frequentist_level,
                                static_cast<double>(e.seats.lower), static_cast<double>(e.seats.upper), e.q_bar});
          for (const auto& w : mi.warnings) tick.notes.push_back("mi: " + w);
        }
      } catch (const Error& e) {
        tick.notes.push_back(std::string("mi: ") + e.what());
      }
    }
    res.ticks.push_back(std::move(tick));
  }
  return res;
}

}  // namespace quickcount
