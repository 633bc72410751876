// Seat intervals from a complete sample with both complete-sample estimators.

#include <iostream>

#include "quickcount/quickcount.hpp"

using namespace quickcount;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : QC_SAMPLE_DATA;
  const auto catalog = Catalog::load(dir + "/catalog.json");
  const auto frame = read_frame(dir + "/frame.csv");
  const auto returns = read_returns(catalog, dir + "/returns.csv", &frame);

  const auto boot = bootstrap_chamber(catalog, group_by_stratum(catalog, frame, returns), {300, 1, 1});
  const auto bayes = bayes_chamber(catalog, frame, sufficient_stats(catalog, frame, returns), {4000, 1, 1});

  const auto f = summarize_seats(catalog, boot.chambers, 0.95);
  const auto b = summarize_seats(catalog, bayes.chambers, 0.95);
  std::cout << "force  bootstrap    bayes\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    std::cout << catalog.force(f[i].force).id << "\t[" << f[i].interval.lower << ", " << f[i].interval.upper << "]\t["
              << b[i].interval.lower << ", " << b[i].interval.upper << "]\n";
}
