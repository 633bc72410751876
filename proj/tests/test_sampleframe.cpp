#include <catch_amalgamated.hpp>

#include <set>

#include "fixtures.hpp"
#include "quickcount/sampleframe.hpp"

using namespace quickcount;
using qc_test::small_catalog;

namespace {

Frame grid_frame(int strata, int per_stratum, int nominal = 500) {
  std::vector<StationInfo> st;
  for (int h = strata; h >= 1; --h)
    for (int i = 0; i < per_stratum; ++i) st.push_back({{h * 10, i}, nominal});
  return Frame(st);
}

StationReturn ret(int stratum, std::int64_t station, int nominal, std::vector<std::optional<std::int64_t>> votes) {
  return {{stratum, station}, nominal, std::move(votes)};
}

}  // namespace

TEST_CASE("frame sorts strata and sums nominal lists", "[sampleframe]") {
  const auto frame = grid_frame(3, 4, 400);
  CHECK(frame.strata() == std::vector<int>{10, 20, 30});
  CHECK(frame.population_size() == 12);
  CHECK(frame.population_size(1) == 4);
  CHECK(frame.nominal_list(2) == 1600.0);
  CHECK(frame.nominal_list() == 4800.0);
  CHECK(frame.stratum_index(20) == 1u);
  CHECK_FALSE(frame.stratum_index(25).has_value());
  CHECK_THROWS_AS(frame.require_stratum(25), InputError);
}

TEST_CASE("frame rejects bad stations", "[sampleframe]") {
  CHECK_THROWS_AS(Frame({{{1, 0}, 100}, {{1, 0}, 100}}), InputError);
  CHECK_THROWS_AS(Frame({{{1, 0}, 0}}), InputError);
  CHECK_THROWS_AS(Frame({{{1, 0}, 751}}), InputError);
  CHECK_NOTHROW(Frame({{{1, 0}, 751}}, 1000));
}

TEST_CASE("planned sample flags", "[sampleframe]") {
  auto frame = grid_frame(2, 5);
  frame.set_planned_sample({{10, 1}, {10, 3}, {20, 0}, {10, 1}});
  CHECK(frame.planned_size(0) == 2);
  CHECK(frame.planned_size(1) == 1);
  CHECK(frame.planned_size() == 3);
  CHECK_THROWS_AS(frame.set_planned_sample({{30, 0}}), InputError);
}

TEST_CASE("abstentions are derived from the nominal list", "[sampleframe]") {
  const auto cat = small_catalog();
  // ballot options: A B C I N AB
  auto r = ret(10, 0, 500, {100, 80, 20, 0, 5, 30});
  CHECK(r.ballots() == 235);
  CHECK(r.abstentions() == 265);
  const auto row = option_row(cat, r);
  CHECK(row[cat.abstention_option()] == 265.0);

  auto over = ret(10, 0, 100, {100, 80, 20, 0, 5, 30});
  CHECK(over.abstentions() == 0);
  const auto frame = grid_frame(1, 2);
  CHECK_THROWS_AS(validate_return(cat, frame, over), InputError);
  CHECK_NOTHROW(validate_return(cat, frame, r));
  CHECK_THROWS_AS(validate_return(cat, frame, ret(99, 0, 500, {0, 0, 0, 0, 0, 0})), InputError);
  CHECK_THROWS_AS(validate_return(cat, frame, ret(10, 0, 500, {0, 0, 0, 0, -1, 0})), InputError);
  CHECK_THROWS_AS(option_row(cat, ret(10, 0, 500, {0, 0, 0})), InputError);
  CHECK_THROWS_AS(option_row(cat, ret(10, 0, 500, {0, 0, std::nullopt, 0, 0, 0})), InputError);
}

TEST_CASE("grouping and the expansion estimator", "[sampleframe]") {
  const auto cat = small_catalog();
  const auto frame = grid_frame(2, 50);
  std::vector<StationReturn> rs{ret(10, 0, 500, {10, 0, 0, 0, 0, 0}), ret(10, 1, 500, {30, 0, 0, 0, 0, 0}),
                                ret(20, 4, 500, {5, 5, 0, 0, 0, 0})};
  const auto groups = group_by_stratum(cat, frame, rs);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].rows.rows() == 2);
  CHECK(groups[0].population_size == 50);
  const auto t = estimate_totals(groups);
  CHECK(t(0, 0) == 1000.0);  // 50/2 * 40
  CHECK(t(1, 1) == 250.0);
  CHECK(t(0, cat.abstention_option()) == 50.0 / 2.0 * (490 + 470));

  const auto partial = group_by_stratum(cat, frame, {rs[0]});
  CHECK_THROWS_AS(estimate_totals(partial), MissingStratumError);
}

TEST_CASE("draw_sample is a deterministic stratified SRSWOR", "[sampleframe]") {
  const auto frame = grid_frame(4, 30);
  std::vector<StationReturn> pop;
  for (const auto& s : frame.stations()) pop.push_back({s.key, s.nominal_list, {1, 0, 0, 0, 0, 0}});
  const std::vector<std::size_t> sizes{3, 5, 0, 30};
  const auto a = draw_sample(frame, pop, sizes, 77);
  const auto b = draw_sample(frame, pop, sizes, 77);
  REQUIRE(a.size() == 38);
  std::set<StationKey> keys;
  std::map<int, int> per;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].key == b[i].key);
    keys.insert(a[i].key);
    ++per[a[i].key.stratum];
  }
  CHECK(keys.size() == 38);
  CHECK(per[10] == 3);
  CHECK(per[20] == 5);
  CHECK(per[40] == 30);
  const auto c = draw_sample(frame, pop, sizes, 78);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || !(a[i].key == c[i].key);
  CHECK(differs);
  CHECK_THROWS_AS(draw_sample(frame, pop, {3, 5, 0, 31}, 1), DesignError);
}

TEST_CASE("draw_sample inclusion is uniform", "[sampleframe][property]") {
  const auto frame = grid_frame(1, 10);
  std::vector<StationReturn> pop;
  for (const auto& s : frame.stations()) pop.push_back({s.key, s.nominal_list, {}});
  std::vector<int> hits(10, 0);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r)
    for (const auto& s : draw_sample(frame, pop, {3}, static_cast<std::uint64_t>(r))) ++hits[s.key.station];
  for (int h : hits) CHECK(std::abs(h / static_cast<double>(reps) - 0.3) < 0.015);
}

TEST_CASE("partial sample bookkeeping", "[sampleframe]") {
  const auto frame = grid_frame(3, 5);
  PartialSample p;
  p.planned = 8;
  p.received = {ret(10, 0, 1, {}), ret(10, 1, 1, {}), ret(30, 2, 1, {})};
  CHECK(p.fraction() == Catch::Approx(3.0 / 8.0));
  CHECK(p.strata_with_data(frame) == 2);
}
