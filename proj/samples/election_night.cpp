// Replays an arrival log and prints the leading party's intervals per update.

#include <iostream>

#include "quickcount/quickcount.hpp"

using namespace quickcount;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : QC_SAMPLE_DATA;
  const auto catalog = Catalog::load(dir + "/catalog.json");
  const auto frame = read_frame(dir + "/frame.csv");
  const auto log = read_arrival_log(catalog, read_csv_file(dir + "/arrivals.csv"), "arrivals.csv", &frame);

  ReplayOptions opt;
  opt.cadence = 15 * 60;
  opt.draws = 2000;
  opt.replicates = 100;
  opt.mi.m = 5;
  opt.hierarchy = read_hierarchy(dir + "/clusters.csv");
  const auto res = replay(catalog, frame, log, opt);

  const ForceIndex leader = catalog.force_index("PA");
  std::cout << "time                  received  level  bayes      freq\n";
  for (const auto& t : res.ticks) {
    std::cout << format_timestamp(t.time) << "  " << t.received << "/" << t.planned << "    " << t.bayes_level << "   ";
    for (const auto& r : res.rows)
      if (r.tick == t.tick && r.force == leader) std::cout << " [" << r.lower << ", " << r.upper << "]";
    std::cout << '\n';
  }
  if (!res.audit.empty()) std::cout << res.audit.size() << " events rejected\n";
}
