#include <catch_amalgamated.hpp>

#include <map>
#include <numeric>

#include "quickcount/design.hpp"
#include "quickcount/replay.hpp"
#include "quickcount/synth.hpp"

using namespace quickcount;

namespace {

struct Night {
  Catalog catalog;
  Frame frame;
  std::vector<StationReturn> population;
  std::vector<StationReturn> sample;
  ClusteringHierarchy hierarchy;
};

Night night(std::uint64_t seed, int strata = 9, int per_stratum = 30, std::size_t n_h = 8) {
  Night n{synthetic_catalog(strata), {}, {}, {}, {}};
  FrameConfig fc;
  fc.strata = strata;
  fc.stations_per_stratum = per_stratum;
  n.frame = synthetic_frame(fc, seed);
  PopulationConfig pc;
  pc.national_shares = synthetic_shares(n.catalog);
  n.population = synthetic_population(n.catalog, n.frame, pc, seed);
  draw_planned_sample(n.frame, std::vector<std::size_t>(n.frame.num_strata(), n_h), seed);
  for (std::size_t i = 0; i < n.frame.population_size(); ++i)
    if (n.frame.station(i).in_sample) n.sample.push_back(n.population[i]);
  std::vector<StratumProfile> profiles;
  const auto totals = population_totals(n.catalog, n.frame, n.population);
  for (std::size_t h = 0; h < n.frame.num_strata(); ++h) {
    StratumProfile p{n.frame.strata()[h], {}};
    for (std::size_t c = 0; c < 4; ++c) p.features.push_back(totals(h, c) / n.frame.nominal_list(h));
    profiles.push_back(p);
  }
  n.hierarchy = build_hierarchy(profiles, {1, 3});
  return n;
}

ReplayOptions small_options(const Night& n) {
  ReplayOptions opt;
  opt.draws = 200;
  opt.replicates = 40;
  opt.mi.m = 2;
  opt.mi.iterations = 2;
  opt.seed = 17;
  opt.hierarchy = n.hierarchy;
  return opt;
}

}  // namespace

TEST_CASE("a complete sample in one tick equals the complete-sample estimators", "[replay]") {
  const auto n = night(1);
  std::vector<ArrivalEvent> log;
  for (const auto& r : n.sample) log.push_back({1000, r});
  const auto opt = small_options(n);
  const auto res = replay(n.catalog, n.frame, log, opt);
  REQUIRE(res.ticks.size() == 1);
  CHECK(res.ticks[0].received == n.sample.size());
  CHECK(res.ticks[0].bayes_level == 95);
  CHECK(res.ticks[0].imputed_strata == 0);

  const auto stats = sufficient_stats(n.catalog, n.frame, n.sample);
  const auto bayes = summarize_seats(n.catalog, bayes_chamber(n.catalog, n.frame, stats, {opt.draws, opt.seed, 1}).chambers, 0.95);
  const auto boot = summarize_seats(
      n.catalog,
      bootstrap_chamber(n.catalog, group_by_stratum(n.catalog, n.frame, n.sample), {opt.replicates, opt.seed, 1}).chambers,
      0.95);
  std::size_t bi = 0, fi = 0;
  for (const auto& row : res.rows) {
    if (row.method == "bayes") {
      const auto& e = bayes.at(bi++);
      CHECK(row.force == e.force);
      CHECK(row.lower == e.interval.lower);
      CHECK(row.upper == e.interval.upper);
      CHECK(row.point == e.mean);
    } else {
      REQUIRE(row.method == "bootstrap");
      const auto& e = boot.at(fi++);
      CHECK(row.lower == e.interval.lower);
      CHECK(row.upper == e.interval.upper);
      CHECK(row.point == e.mean);
    }
  }
  CHECK(bi == bayes.size());
  CHECK(fi == boot.size());
}

TEST_CASE("replay ticks grow monotonically and follow the credibility table", "[replay]") {
  const auto n = night(2);
  ArrivalBias bias;
  bias.mean_minutes = 60;
  const auto log = simulate_arrival(n.frame, n.sample, bias, 0, 5);
  auto opt = small_options(n);
  opt.frequentist = false;
  opt.cadence = 600;
  const auto res = replay(n.catalog, n.frame, log, opt);
  REQUIRE(res.ticks.size() > 3);
  std::size_t prev = 0;
  for (const auto& t : res.ticks) {
    CHECK(t.received > prev);
    prev = t.received;
    CHECK(t.bayes_level == credibility_adjust(t.received, t.planned));
    CHECK((t.time - log.front().time) % 600 == 0);
  }
  CHECK(res.ticks.back().received == n.sample.size());
  CHECK(res.audit.empty());

  const auto again = replay(n.catalog, n.frame, log, opt);
  REQUIRE(again.rows.size() == res.rows.size());
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    CHECK(again.rows[i].lower == res.rows[i].lower);
    CHECK(again.rows[i].upper == res.rows[i].upper);
    CHECK(again.rows[i].point == res.rows[i].point);
  }
}

TEST_CASE("early ticks impute empty strata and run MI", "[replay]") {
  const auto n = night(3);
  std::vector<ArrivalEvent> log;
  // one station from each of the first three strata, then everything
  std::map<int, bool> taken;
  for (const auto& r : n.sample)
    if (r.key.stratum <= 3 && !taken[r.key.stratum]) {
      taken[r.key.stratum] = true;
      log.push_back({0, r});
    }
  for (const auto& r : n.sample)
    if (!(r.key.stratum <= 3 && std::count_if(log.begin(), log.end(), [&](auto& e) { return e.ret.key == r.key; })))
      log.push_back({300, r});
  const auto res = replay(n.catalog, n.frame, log, small_options(n));
  REQUIRE(res.ticks.size() == 2);
  CHECK(res.ticks[0].imputed_strata == 6);
  CHECK(res.ticks[0].strata_with_data == 3);
  CHECK(res.ticks[0].bayes_level == 99);
  const bool mi_first = std::any_of(res.rows.begin(), res.rows.end(), [](auto& r) { return r.tick == 0 && r.method == "mi"; });
  const bool warned = std::any_of(res.ticks[0].notes.begin(), res.ticks[0].notes.end(),
                                  [](auto& s) { return s.find("not informative") != std::string::npos; });
  CHECK(mi_first);
  CHECK(warned);
  CHECK(res.ticks[1].imputed_strata == 0);
}

TEST_CASE("replay without a hierarchy reports empty strata", "[replay]") {
  const auto n = night(4);
  std::vector<ArrivalEvent> log{{0, n.sample.front()}};
  auto opt = small_options(n);
  opt.hierarchy.reset();
  opt.frequentist = false;
  const auto res = replay(n.catalog, n.frame, log, opt);
  REQUIRE(res.ticks.size() == 1);
  CHECK(res.rows.empty());
  REQUIRE(res.ticks[0].notes.size() == 1);
  CHECK(res.ticks[0].notes[0].find("hierarchy") != std::string::npos);
}

TEST_CASE("unknown, unplanned and repeated stations go to the audit trail", "[replay]") {
  const auto n = night(5);
  StationReturn unknown = n.sample.front();
  unknown.key = {999, 1};
  StationReturn unplanned;
  for (std::size_t i = 0; i < n.frame.population_size(); ++i)
    if (!n.frame.station(i).in_sample) {
      unplanned = n.population[i];
      break;
    }
  std::vector<ArrivalEvent> log{{0, n.sample[0]}, {1, unknown}, {2, unplanned}, {3, n.sample[0]}, {4, n.sample[1]}};
  auto opt = small_options(n);
  opt.frequentist = false;
  const auto res = replay(n.catalog, n.frame, log, opt);
  REQUIRE(res.audit.size() == 3);
  CHECK(res.audit[0].reason == "unknown station");
  CHECK(res.audit[1].reason == "station outside the planned sample");
  CHECK(res.audit[2].reason == "station already received");
  CHECK(res.ticks.back().received == 2);

  std::vector<ArrivalEvent> backwards{{5, n.sample[0]}, {4, n.sample[1]}};
  CHECK_THROWS_AS(replay(n.catalog, n.frame, backwards, opt), InputError);
}

TEST_CASE("arrival without bias is a uniform order", "[replay]") {
  FrameConfig fc;
  fc.strata = 1;
  fc.stations_per_stratum = 8;
  const auto frame = synthetic_frame(fc, 1);
  std::vector<StationReturn> sample;
  for (const auto& s : frame.stations()) sample.push_back({s.key, s.nominal_list, {}});
  std::vector<std::vector<int>> position(8, std::vector<int>(8, 0));
  const int logs = 4000;
  for (int i = 0; i < logs; ++i) {
    const auto log = simulate_arrival(frame, sample, {}, 0, static_cast<std::uint64_t>(i));
    for (std::size_t p = 0; p < log.size(); ++p) ++position[static_cast<std::size_t>(log[p].ret.key.station)][p];
  }
  // chi-square over 64 cells with expected count 500; 49 degrees of freedom
  double chi = 0.0;
  for (const auto& row : position)
    for (int c : row) chi += (c - 500.0) * (c - 500.0) / 500.0;
  CHECK(chi < 85.0);
}

TEST_CASE("strong rural delay puts urban stations first", "[replay]") {
  FrameConfig fc;
  fc.strata = 3;
  fc.stations_per_stratum = 40;
  fc.urban_fraction = 0.5;
  const auto frame = synthetic_frame(fc, 2);
  std::vector<StationReturn> sample;
  for (const auto& s : frame.stations()) sample.push_back({s.key, s.nominal_list, {}});
  ArrivalBias bias;
  bias.rural = 40.0;
  const auto log = simulate_arrival(frame, sample, bias, 0, 3);
  bool seen_rural = false;
  for (const auto& ev : log) {
    const bool urban = frame.station(*frame.find(ev.ret.key)).urban;
    if (!urban) seen_rural = true;
    else REQUIRE_FALSE(seen_rural);
  }
}

TEST_CASE("larger nominal lists arrive later under list bias", "[replay]") {
  std::vector<StationInfo> st;
  for (int i = 0; i < 7; ++i) st.push_back({{1, i}, 100 * (i + 1)});
  const Frame frame(st);
  std::vector<StationReturn> sample;
  for (const auto& s : frame.stations()) sample.push_back({s.key, s.nominal_list, {}});
  ArrivalBias bias;
  bias.list = 1.5;
  std::vector<double> mean(7, 0.0);
  const int logs = 1000;
  for (int i = 0; i < logs; ++i)
    for (const auto& ev : simulate_arrival(frame, sample, bias, 0, static_cast<std::uint64_t>(i)))
      mean[static_cast<std::size_t>(ev.ret.key.station)] += static_cast<double>(ev.time) / logs;
  for (std::size_t i = 1; i < mean.size(); ++i) CHECK(mean[i] > mean[i - 1]);
}

TEST_CASE("leading-party interval narrows over the last ticks", "[replay][simulation]") {
  // 50 synthetic nights; Bayesian path only
  int narrowing = 0;
  const int nights = 50;
  for (int s = 0; s < nights; ++s) {
    const auto n = night(100 + static_cast<std::uint64_t>(s), 9, 30, 12);
    ArrivalBias bias;
    bias.list = 0.5;
    bias.rural = 0.3;
    const auto log = simulate_arrival(n.frame, n.sample, bias, 0, static_cast<std::uint64_t>(s));
    auto opt = small_options(n);
    opt.frequentist = false;
    opt.cadence = std::max<std::int64_t>(1, (log.back().time - log.front().time) / 19);
    const auto res = replay(n.catalog, n.frame, log, opt);
    // leader: largest point estimate on the final tick
    const std::size_t last = res.ticks.back().tick;
    ForceIndex leader = 0;
    double best = -1.0;
    for (const auto& r : res.rows)
      if (r.tick == last && r.point > best) {
        best = r.point;
        leader = r.force;
      }
    std::vector<double> width;
    for (const auto& r : res.rows)
      if (r.force == leader) width.push_back(r.upper - r.lower);
    REQUIRE(width.size() >= 10);
    bool ok = true;
    for (std::size_t i = width.size() - 9; i < width.size(); ++i) ok = ok && width[i] <= width[i - 1];
    narrowing += ok ? 1 : 0;
  }
  CHECK(narrowing >= 0.8 * nights);
}
