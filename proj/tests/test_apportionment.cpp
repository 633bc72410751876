#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "oracle/largest_remainder_bruteforce.hpp"
#include "oracle/random_election.hpp"
#include "oracle/seat_rules_oracle.hpp"
#include "quickcount/apportionment.hpp"

using namespace quickcount;
using qc_test::row_of;
using qc_test::small_catalog;
using qc_test::small_chamber;

namespace {

std::vector<double> forces_of(const Catalog& cat, const std::vector<double>& option_row) {
  std::vector<double> f(cat.num_forces());
  split_into_forces<double>(cat, option_row, f);
  return f;
}

}  // namespace

TEST_CASE("coalition beats a larger single party", "[apportionment]") {
  const auto cat = small_catalog({}, 7);
  const auto row = forces_of(cat, row_of(cat, {{"A", 100}, {"B", 80}, {"AB", 30}, {"C", 200}}));
  const auto w = district_winner(cat, 3, row);
  CHECK(w.candidacy.kind == Candidacy::Kind::coalition);
  CHECK(w.votes == 210.0);
  CHECK(w.seat_holder == 0);
  // the seat agreement names B in district 7
  CHECK(district_winner(cat, 7, row).seat_holder == 1);
}

TEST_CASE("district ties go to the lowest-ranked candidacy", "[apportionment]") {
  const auto cat = small_catalog();
  auto w = district_winner(cat, 1, forces_of(cat, row_of(cat, {{"A", 50}, {"B", 50}, {"C", 100}})));
  CHECK(w.tied);
  CHECK(w.seat_holder == 0);  // coalition AB ranks as A
  w = district_winner(cat, 1, forces_of(cat, row_of(cat, {{"C", 10}, {"I", 10}})));
  CHECK(w.tied);
  CHECK(w.seat_holder == 2);
  w = district_winner(cat, 1, std::vector<double>(cat.num_forces(), 0.0));
  CHECK(w.degenerate);
  CHECK(w.seat_holder == 0);
}

TEST_CASE("national shares and threshold", "[apportionment]") {
  const auto cat = small_catalog();
  Table f(2, cat.num_forces());
  // A 500, B 300, C 20, I 180, N 50, X 1000
  f(0, 0) = 300; f(1, 0) = 200;
  f(0, 1) = 300;
  f(1, 2) = 20;
  f(0, 3) = 180;
  f(1, 4) = 50;
  f(0, 5) = 1000;
  const auto s = national_shares(cat, f);
  CHECK(s.lambda[0] == Catch::Approx(0.5));
  CHECK(s.lambda[2] == Catch::Approx(0.02));
  CHECK(s.lambda[3] == Catch::Approx(0.18));
  CHECK(s.lambda[4] == 0.0);
  CHECK(s.eta[0] == Catch::Approx(500.0 / 800.0));
  CHECK(s.eta[1] == Catch::Approx(300.0 / 800.0));
  CHECK(s.eta[2] == 0.0);
  CHECK(s.eta[3] == 0.0);

  Table empty(1, cat.num_forces());
  empty(0, 5) = 10;
  CHECK_THROWS_AS(national_shares(cat, empty), EstimationError);
}

TEST_CASE("largest remainder examples", "[apportionment]") {
  const std::vector<double> w{0.46, 0.34, 0.20};
  CHECK(largest_remainder(5, w) == std::vector<int>{2, 2, 1});
  CHECK(largest_remainder(0, w) == std::vector<int>{0, 0, 0});
  // equal remainders: larger weight first
  const std::vector<double> tie{0.5, 0.25, 0.25};
  CHECK(largest_remainder(2, tie) == std::vector<int>{1, 1, 0});
  const std::vector<double> tie2{0.25, 0.5, 0.25};
  CHECK(largest_remainder(1, tie2) == std::vector<int>{0, 1, 0});
  const std::vector<double> bad{0.5, 0.6};
  CHECK_THROWS_AS(largest_remainder(3, bad), InputError);
  const std::vector<double> neg{1.5, -0.5};
  CHECK_THROWS_AS(largest_remainder(3, neg), InputError);
}

TEST_CASE("largest remainder agrees with brute force on small cases", "[apportionment][property]") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> np(1, 4), seats(0, 12), c(1, 9);
  for (int t = 0; t < 500; ++t) {
    const int P = np(rng);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(P));
    for (auto& x : counts) x = c(rng);
    std::int64_t C = 0;
    for (auto x : counts) C += x;
    std::vector<double> w;
    for (auto x : counts) w.push_back(static_cast<double>(x) / static_cast<double>(C));
    const int S = seats(rng);
    REQUIRE(largest_remainder(S, w) == qc_oracle::largest_remainder_bruteforce(S, counts));
  }
}

TEST_CASE("seat cap examples", "[apportionment]") {
  const ElectoralConstants k;
  CHECK(seat_cap(0.50, k) == 290);
  CHECK(seat_cap(0.60, k) == 300);
  CHECK(seat_cap(0.0, k) == 40);
  // 500 * (0.42 + 0.08) is exactly 250 but not in binary
  CHECK(seat_cap(0.42, k) == 250);
}

TEST_CASE("allocate_pr without binding caps", "[apportionment]") {
  const auto cat = small_catalog(small_chamber(10, 10, 15));
  NationalShares s;
  s.eta = {0.46, 0.34, 0.20, 0, 0, 0};
  s.nu = s.lambda = s.eta;
  const std::vector<int> maj{4, 3, 2, 1, 0, 0};
  const auto c = allocate_pr(cat, maj, s);
  CHECK(c.seats[0].pr == 5);
  CHECK(c.seats[1].pr == 3);
  CHECK(c.seats[2].pr == 2);
  CHECK(c.seats[3].pr == 0);
  CHECK(c.total() == 20);
}

TEST_CASE("allocate_pr freezes a party over its cap", "[apportionment]") {
  // 20 seats: 10 districts, 10 PR, hard cap 12; margin keeps eta-based caps loose
  auto k = small_chamber(10, 10, 12);
  const auto cat = small_catalog(k);
  NationalShares s;
  s.eta = {0.6, 0.3, 0.1, 0, 0, 0};
  s.nu = s.lambda = s.eta;
  const std::vector<int> maj{9, 1, 0, 0, 0, 0};
  const auto c = allocate_pr(cat, maj, s);
  CHECK(c.seats[0].pr == 3);  // 12 - 9
  CHECK(c.seats[1].pr == 5);  // 7 seats split 3:1
  CHECK(c.seats[2].pr == 2);
  CHECK(chamber_violation(cat, c, s).empty());

  SECTION("majority above the cap keeps its districts and gets no PR") {
    const std::vector<int> maj2{10, 0, 0, 0, 0, 0};
    k.seat_cap = 8;
    const auto cat2 = small_catalog(k);
    const auto c2 = allocate_pr(cat2, maj2, s);
    CHECK(c2.seats[0].majority == 10);
    CHECK(c2.seats[0].pr == 0);
    CHECK(c2.pr_total() == 10);
    CHECK(chamber_violation(cat2, c2, s).empty());
  }
}

TEST_CASE("allocate_pr with no qualifying party fails", "[apportionment]") {
  const auto cat = small_catalog(small_chamber(2, 2, 4));
  NationalShares s;
  s.eta.assign(cat.num_forces(), 0.0);
  s.nu = s.lambda = s.eta;
  const std::vector<int> maj{0, 0, 0, 2, 0, 0};
  CHECK_THROWS_AS(allocate_pr(cat, maj, s), EstimationError);
}

TEST_CASE("compose_chamber requires one row per majority seat", "[apportionment]") {
  const auto cat = small_catalog(small_chamber(2, 2, 4));
  Table t(1, cat.num_options());
  const std::vector<int> d{1};
  CHECK_THROWS_AS(compose_chamber(cat, d, t), InputError);
}

TEST_CASE("random elections match the integer seat-rule oracle", "[apportionment][property]") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 60; ++t) {
    const auto e = qc_oracle::random_election(rng);
    const auto oracle = qc_oracle::oracle_chamber(e.catalog, e.districts, e.votes);
    INFO("election " << t);
    int oracle_total = 0;
    for (ForceIndex f = 0; f < e.catalog.num_forces(); ++f) oracle_total += oracle.majority[f] + oracle.pr[f];
    if (oracle_total < e.catalog.constants().total_seats) {
      // every qualifying party capped out before the PR seats ran out
      REQUIRE_THROWS_AS(compose_chamber(e.catalog, e.districts, e.option_table()), EstimationError);
      continue;
    }
    const auto res = compose_chamber(e.catalog, e.districts, e.option_table());
    REQUIRE(chamber_violation(e.catalog, res.chamber, res.shares).empty());
    for (ForceIndex f = 0; f < e.catalog.num_forces(); ++f) {
      REQUIRE(res.chamber.seats[f].majority == oracle.majority[f]);
      REQUIRE(res.chamber.seats[f].pr == oracle.pr[f]);
    }
  }
}

TEST_CASE("seat allocation is invariant to scaling all force totals", "[apportionment][property]") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto e = qc_oracle::random_election(rng);
    const auto forces = split_table(e.catalog, e.option_table());
    auto scaled = forces;
    scaled.scale(3.0);
    try {
      const auto a = compose_from_forces(e.catalog, e.districts, forces);
      const auto b = compose_from_forces(e.catalog, e.districts, scaled);
      REQUIRE(a.chamber == b.chamber);
    } catch (const EstimationError&) {
      REQUIRE_THROWS_AS(compose_from_forces(e.catalog, e.districts, scaled), EstimationError);
    }
  }
}

TEST_CASE("adding votes to a party never lowers its majority seats", "[apportionment][property]") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto e = qc_oracle::random_election(rng);
    auto more = e.option_table();
    const auto opt = *e.catalog.single_option(0);
    for (std::size_t d = 0; d < more.rows(); ++d) more(d, opt) += 500;
    const auto a_forces = split_table(e.catalog, e.option_table());
    const auto b_forces = split_table(e.catalog, more);
    std::vector<DistrictWinner> a, b;
    for (std::size_t d = 0; d < more.rows(); ++d) {
      a.push_back(district_winner(e.catalog, e.districts[d], a_forces.row(d)));
      b.push_back(district_winner(e.catalog, e.districts[d], b_forces.row(d)));
    }
    int holder_a = 0, holder_b = 0;
    for (const auto& w : a) holder_a += w.candidacy.rank == 0;
    for (const auto& w : b) holder_b += w.candidacy.rank == 0;
    REQUIRE(holder_b >= holder_a);
  }
}
