#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracle/stratified_variance.hpp"
#include "quickcount/bootstrap.hpp"

using namespace quickcount;

namespace {

double expected_factor(const MirrorMatchParams& p) {
  double c = 0.0;
  for (const auto& d : p.designs) c += d.probability * d.variance_factor(p.sample_size);
  return c;
}

}  // namespace

TEST_CASE("mirror-match parameters for an integral design", "[bootstrap]") {
  const auto p = mirror_match_params(10, 50);
  CHECK(p.integral);
  CHECK(p.f == Catch::Approx(0.2));
  CHECK(p.k == Catch::Approx(5.0));
  CHECK(p.m == Catch::Approx(2.0));
  REQUIRE(p.designs.size() == 1);
  CHECK(p.designs[0].draw_size == 2);
  CHECK(p.designs[0].repeats == 5);
  CHECK(p.designs[0].size() == 10);
  CHECK(expected_factor(p) == Catch::Approx((1 - 0.2) / 10));
}

TEST_CASE("randomized mirror-match matches the design variance in expectation", "[bootstrap][property]") {
  for (std::size_t N = 2; N <= 60; ++N)
    for (std::size_t n = 2; n <= N; ++n) {
      const auto p = mirror_match_params(n, N);
      INFO("n=" << n << " N=" << N);
      double total = 0.0;
      for (const auto& d : p.designs) {
        REQUIRE(d.probability >= 0.0);
        REQUIRE(d.probability <= 1.0);
        REQUIRE(d.draw_size >= 1);
        REQUIRE(d.draw_size <= n);
        REQUIRE(d.repeats >= 1);
        total += d.probability;
      }
      REQUIRE(total == Catch::Approx(1.0));
      REQUIRE(p.variance_matched);
      const double target = (1.0 - static_cast<double>(n) / static_cast<double>(N)) / static_cast<double>(n);
      REQUIRE(expected_factor(p) == Catch::Approx(target).margin(1e-12));
    }
}

TEST_CASE("single-station strata cannot match the variance", "[bootstrap]") {
  const auto p = mirror_match_params(1, 20);
  CHECK_FALSE(p.variance_matched);
  CHECK(p.designs.front().size() >= 1);
  CHECK_THROWS_AS(mirror_match_params(0, 20), MissingStratumError);
  CHECK_THROWS_AS(mirror_match_params(21, 20), DesignError);
}

TEST_CASE("resample indices are valid and distinct within a draw", "[bootstrap]") {
  const auto p = mirror_match_params(7, 30);
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto idx = mirror_match_indices(p, rng);
    REQUIRE(!idx.empty());
    const MirrorMatchDesign* d = nullptr;
    for (const auto& x : p.designs)
      if (x.size() == idx.size()) d = &x;
    REQUIRE(d != nullptr);
    for (std::size_t r = 0; r < d->repeats; ++r) {
      std::set<std::size_t> draw(idx.begin() + static_cast<std::ptrdiff_t>(r * d->draw_size),
                                 idx.begin() + static_cast<std::ptrdiff_t>((r + 1) * d->draw_size));
      REQUIRE(draw.size() == d->draw_size);
      REQUIRE(*draw.rbegin() < 7);
    }
  }
}

TEST_CASE("empirical resampling variance of a non-integral design", "[bootstrap][property]") {
  const std::size_t n = 7, N = 30;
  const auto p = mirror_match_params(n, N);
  REQUIRE_FALSE(p.integral);
  Table rows(0, 1);
  std::vector<std::vector<double>> y(1);
  for (double v : {3.0, 9.0, 4.0, 12.0, 7.0, 1.0, 8.0}) {
    const std::vector<double> r{v};
    rows.append_row(r);
    y[0].push_back(v);
  }
  const std::vector<double> Ns{static_cast<double>(N)};
  Rng rng(42);
  const int B = 200000;
  std::vector<double> totals(B);
  for (int b = 0; b < B; ++b) {
    double t = 0.0;
    resampled_totals(rows, p, rng, std::span<double>(&t, 1));
    totals[static_cast<std::size_t>(b)] = t;
  }
  CHECK(sample_mean(totals) == Catch::Approx(qc_oracle::expansion_total(y, Ns)).epsilon(0.005));
  CHECK(sample_variance(totals) == Catch::Approx(qc_oracle::expansion_variance(y, Ns)).epsilon(0.03));
}

TEST_CASE("bootstrap run is independent of the worker count", "[bootstrap]") {
  const auto cat = qc_test::small_catalog(qc_test::small_chamber(3, 3, 5));
  std::mt19937_64 gen(8);
  std::poisson_distribution<int> pois(40);
  std::vector<StratumSample> sample(3);
  for (int h = 0; h < 3; ++h) {
    sample[h].stratum = h + 1;
    sample[h].population_size = 40;
    sample[h].rows = Table(0, cat.num_options());
    for (int r = 0; r < 8; ++r) {
      std::vector<double> row(cat.num_options());
      for (auto& x : row) x = pois(gen);
      sample[h].rows.append_row(row);
    }
  }
  const auto one = bootstrap_chamber(cat, sample, {200, 5, 1});
  const auto four = bootstrap_chamber(cat, sample, {200, 5, 4});
  REQUIRE(one.chambers == four.chambers);
  REQUIRE(one.seat_holders == four.seat_holders);
  for (const auto& c : one.chambers) REQUIRE(c.total() == 6);

  const auto est = summarize_seats(cat, one.chambers, 0.95);
  for (const auto& e : est) {
    CHECK(e.interval.lower <= e.interval.upper);
    CHECK(e.interval.lower <= e.mean);
    CHECK(e.mean <= e.interval.upper);
  }
  const auto probs = winner_probabilities(cat.num_forces(), one.seat_holders);
  for (std::size_t h = 0; h < probs.rows(); ++h) {
    double s = 0.0;
    for (double x : probs.row(h)) s += x;
    CHECK(s == Catch::Approx(1.0));
  }

  auto missing = sample;
  missing[1].rows = Table(0, cat.num_options());
  CHECK_THROWS_AS(bootstrap_chamber(cat, missing, {10, 5, 1}), MissingStratumError);
}
