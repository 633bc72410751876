// quickcount: command-line front end for the quick-count estimators.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "quickcount/quickcount.hpp"

using namespace quickcount;

namespace {

enum Exit { ok = 0, failure = 1, bad_input = 3, bad_design = 4, missing_stratum = 5, not_estimable = 6 };

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw InputError("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::int64_t parse_duration(const std::string& raw) {
  if (raw.empty()) throw InputError("empty duration");
  std::int64_t unit = 1;
  std::string digits = raw;
  switch (raw.back()) {
    case 's': digits.pop_back(); break;
    case 'm': unit = 60; digits.pop_back(); break;
    case 'h': unit = 3600; digits.pop_back(); break;
    default: break;
  }
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(digits, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != digits.size() || digits.empty() || v <= 0) throw InputError("bad duration '" + raw + "'");
  return v * unit;
}

ArrivalBias parse_bias(const std::string& spec) {
  ArrivalBias b;
  for (const auto& kv : split(spec, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("bias term '" + kv + "' is not key=value");
    const auto key = kv.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("bias term '" + kv + "' has no number");
    }
    if (key == "list") b.list = v;
    else if (key == "rural") b.rural = v;
    else if (key == "west") b.west = v;
    else if (key == "mean") b.mean_minutes = v;
    else if (key == "shape") b.shape = v;
    else throw InputError("unknown bias term '" + key + "' (list, rural, west, mean, shape)");
  }
  return b;
}

std::vector<ForceIndex> parse_forces(const Catalog& catalog, const std::string& ids) {
  std::vector<ForceIndex> out;
  for (const auto& id : split(ids, ',')) out.push_back(catalog.force_index(id));
  return out;
}

Frame load_frame(const std::string& path, const Catalog& catalog) {
  return read_frame(read_csv_file(path), path, catalog.constants().max_nominal_list);
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void write_winners(const std::string& path, const Catalog& catalog, const std::vector<int>& districts, const Table& p) {
  if (path.empty()) return;
  Output out(path);
  write_winner_probabilities(out.stream(), catalog, districts, p);
}

struct Common {
  std::string catalog, frame, returns, out = "-", winners;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--catalog", c.catalog, "electoral catalog (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--frame", c.frame, "sampling frame (CSV)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", c.out, "output CSV ('-' for stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seat-interval estimation for quick counts"};
  app.require_subcommand(1);
  std::function<void()> run;

  // estimate-freq
  Common freq;
  std::size_t freq_b = 300;
  double freq_level = 0.95;
  auto* ef = app.add_subcommand("estimate-freq", "stratified mirror-match bootstrap of the chamber");
  add_common(ef, freq);
  ef->add_option("--returns", freq.returns, "station returns (CSV)")->required()->check(CLI::ExistingFile);
  ef->add_option("--B", freq_b, "bootstrap replicates")->check(CLI::PositiveNumber);
  ef->add_option("--level", freq_level, "interval level")->check(CLI::Range(0.0, 1.0));
  ef->add_option("--winners", freq.winners, "per-district winner probabilities (CSV)");
  ef->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(freq.catalog);
      const auto frame = load_frame(freq.frame, catalog);
      const auto returns = read_returns(catalog, freq.returns, &frame);
      const auto r = bootstrap_chamber(catalog, group_by_stratum(catalog, frame, returns), {freq_b, freq.seed, freq.workers});
      Output out(freq.out);
      write_seat_estimates(out.stream(), catalog, summarize_seats(catalog, r.chambers, freq_level), freq_level, "bootstrap");
      write_winners(freq.winners, catalog, r.districts, winner_probabilities(catalog.num_forces(), r.seat_holders));
    };
  });

  // estimate-bayes
  Common bay;
  std::string bay_clusters;
  std::size_t bay_draws = 10000;
  std::optional<double> bay_level;
  double bay_l0 = 750.0;
  bool bay_hpd = false;
  auto* eb = app.add_subcommand("estimate-bayes", "normal-gamma posterior of the chamber");
  add_common(eb, bay);
  eb->add_option("--returns", bay.returns, "station returns (CSV)")->required()->check(CLI::ExistingFile);
  eb->add_option("--clusters", bay_clusters, "clustering hierarchy for strata without data (CSV)")
      ->check(CLI::ExistingFile);
  eb->add_option("--draws", bay_draws, "posterior draws")->check(CLI::PositiveNumber);
  eb->add_option("--level", bay_level, "credible level; default follows the received share of the plan")
      ->check(CLI::Range(0.0, 1.0));
  eb->add_option("--l0", bay_l0, "nominal list given to imputed strata");
  eb->add_flag("--hpd", bay_hpd, "highest-density seat intervals");
  eb->add_option("--winners", bay.winners, "per-district winner probabilities (CSV)");
  eb->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(bay.catalog);
      const auto frame = load_frame(bay.frame, catalog);
      const auto returns = read_returns(catalog, bay.returns, &frame);
      ReplayOptions opt;
      opt.draws = bay_draws;
      opt.seed = bay.seed;
      opt.workers = bay.workers;
      opt.l0 = bay_l0;
      if (!bay_clusters.empty()) opt.hierarchy = read_hierarchy(bay_clusters);
      TickSummary tick;
      tick.planned = frame.planned_size();
      tick.received = 0;
      for (const auto& r : returns) {
        const auto i = frame.find(r.key);
        if (i && (tick.planned == 0 || frame.station(*i).in_sample)) ++tick.received;
      }
      const auto r = bayes_partial(catalog, frame, returns, opt, tick);
      const double level = bay_level ? *bay_level : tick.bayes_level / 100.0;
      std::cerr << "credible level " << format_number(level) << " (" << tick.received << " of "
                << (tick.planned ? tick.planned : returns.size()) << " planned stations, " << tick.imputed_strata
                << " strata imputed)\n";
      Output out(bay.out);
      write_seat_estimates(out.stream(), catalog, summarize_seats(catalog, r.chambers, level, bay_hpd), level, "bayes");
      write_winners(bay.winners, catalog, r.districts, winner_probabilities(catalog.num_forces(), r.seat_holders));
    };
  });

  // estimate-mi
  Common mic;
  MiOptions mi_opt;
  std::string mi_predictors;
  auto* em = app.add_subcommand("estimate-mi", "multiple imputation of missing returns, pooled bootstrap");
  add_common(em, mic);
  em->add_option("--returns", mic.returns, "station returns received (CSV)")->required()->check(CLI::ExistingFile);
  em->add_option("--m", mi_opt.config.m, "completed datasets")->check(CLI::PositiveNumber);
  em->add_option("--iters", mi_opt.config.iterations, "chained-equation sweeps")->check(CLI::PositiveNumber);
  em->add_option("--donors", mi_opt.config.donors, "predictive-mean-matching donors")->check(CLI::PositiveNumber);
  em->add_option("--B", mi_opt.replicates, "bootstrap replicates per dataset")->check(CLI::PositiveNumber);
  em->add_option("--level", mi_opt.level, "interval level")->check(CLI::Range(0.0, 1.0));
  em->add_option("--predictors", mi_predictors, "comma-separated force ids used as predictors");
  em->add_option("--winners", mic.winners, "per-district winner probabilities (CSV)");
  em->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(mic.catalog);
      const auto frame = load_frame(mic.frame, catalog);
      const auto returns = read_returns(catalog, mic.returns, &frame);
      mi_opt.seed = mic.seed;
      mi_opt.workers = mic.workers;
      if (!mi_predictors.empty()) mi_opt.config.predictors = parse_forces(catalog, mi_predictors);
      const auto r = mi_chamber(catalog, frame, returns, mi_opt);
      warn(r.warnings);
      std::cerr << r.missing_rows << " of " << r.rows << " planned stations missing, " << r.missing_cells
                << " cells imputed\n";
      Output out(mic.out);
      write_mi_estimates(out.stream(), catalog, r.estimates, mi_opt.level);
      if (!r.runs.empty())
        write_winners(mic.winners, catalog, r.runs.front().districts, r.winner_probabilities(catalog.num_forces()));
    };
  });

  // cluster
  std::string cl_historic, cl_k, cl_out = "-";
  auto* cl = app.add_subcommand("cluster", "complete-linkage hierarchy of strata from historic results");
  cl->add_option("--historic", cl_historic, "historic results per stratum (CSV)")->required()->check(CLI::ExistingFile);
  cl->add_option("--k", cl_k, "comma-separated cut levels (default 1,10,20,50,100,200,300)");
  cl->add_option("--out", cl_out, "hierarchy CSV ('-' for stdout)");
  cl->callback([&] {
    run = [&] {
      std::vector<int> ks = default_cut_levels();
      if (!cl_k.empty()) {
        ks.clear();
        for (const auto& k : split(cl_k, ',')) ks.push_back(static_cast<int>(detail::parse_int(k, "--k")));
      }
      const auto historic = read_historic(read_csv_file(cl_historic), cl_historic);
      std::vector<std::string> warnings;
      const auto h = build_hierarchy(historic_profiles(historic), ks, &warnings);
      warn(warnings);
      Output out(cl_out);
      write_hierarchy(out.stream(), h);
    };
  });

  // design
  std::string ds_catalog, ds_frame, ds_population, ds_n, ds_estimator = "freq", ds_out = "-";
  ErrorBoundOptions ds_opt;
  auto* ds = app.add_subcommand("design", "simulated seat-error bounds by sample size");
  ds->add_option("--catalog", ds_catalog, "electoral catalog (JSON)")->required()->check(CLI::ExistingFile);
  ds->add_option("--population", ds_population, "full census of station returns (CSV)")
      ->required()
      ->check(CLI::ExistingFile);
  ds->add_option("--frame", ds_frame, "sampling frame (default: built from the population)")->check(CLI::ExistingFile);
  ds->add_option("--n", ds_n, "comma-separated total sample sizes")->required();
  ds->add_option("--reps", ds_opt.reps, "simulated samples per size")->check(CLI::PositiveNumber);
  ds->add_option("--estimator", ds_estimator, "point estimator")->check(CLI::IsMember({"freq", "bayes"}));
  ds->add_option("--level", ds_opt.level, "error quantile")->check(CLI::Range(0.0, 1.0));
  ds->add_option("--seed", ds_opt.seed, "master seed");
  ds->add_option("--workers", ds_opt.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  ds->add_option("--out", ds_out, "output CSV ('-' for stdout)");
  ds->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(ds_catalog);
      Frame frame;
      std::vector<StationReturn> population;
      if (!ds_frame.empty()) {
        frame = load_frame(ds_frame, catalog);
        population = read_returns(catalog, ds_population, &frame);
      } else {
        population = read_returns(catalog, ds_population);
        std::vector<StationInfo> st;
        for (const auto& r : population) st.push_back({r.key, r.nominal_list});
        frame = Frame(std::move(st), catalog.constants().max_nominal_list);
      }
      // align the census with the frame order
      std::vector<StationReturn> aligned(frame.population_size());
      std::vector<bool> seen(frame.population_size(), false);
      for (auto& r : population) {
        const auto i = frame.find(r.key);
        if (!i) throw InputError("population station " + to_string(r.key) + " is not in the frame");
        if (seen[*i]) throw InputError("population station " + to_string(r.key) + " appears twice");
        seen[*i] = true;
        aligned[*i] = std::move(r);
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw InputError("population does not cover every frame station");
      std::vector<std::size_t> sizes;
      for (const auto& n : split(ds_n, ',')) sizes.push_back(static_cast<std::size_t>(detail::parse_int(n, "--n")));
      ds_opt.estimator = ds_estimator == "bayes" ? PointEstimator::bayesian : PointEstimator::frequentist;
      const auto bounds = simulate_error_bounds(catalog, frame, aligned, sizes, ds_opt);
      Output out(ds_out);
      write_error_bounds(out.stream(), bounds);
    };
  });

  // allocate
  std::string al_frame, al_out = "-";
  std::size_t al_base = 20;
  std::uint64_t al_seed = 1;
  bool al_plain = false;
  auto* al = app.add_subcommand("allocate", "allocate and draw the planned sample; writes the frame with in_sample");
  al->add_option("--frame", al_frame, "sampling frame (CSV)")->required()->check(CLI::ExistingFile);
  al->add_option("--base", al_base, "stations per stratum before augmentation")->check(CLI::PositiveNumber);
  al->add_flag("--no-augment", al_plain, "skip the time-zone and state augmentation rules");
  al->add_option("--seed", al_seed, "master seed");
  al->add_option("--out", al_out, "output frame CSV ('-' for stdout)");
  al->callback([&] {
    run = [&] {
      auto frame = read_frame(read_csv_file(al_frame), al_frame);
      const auto sizes = allocate_sample(frame, al_base, al_plain ? std::vector<AugmentationRule>{} : default_rules());
      draw_planned_sample(frame, sizes, al_seed);
      std::cerr << "planned sample: " << frame.planned_size() << " stations in " << frame.num_strata() << " strata\n";
      Output out(al_out);
      write_frame(out.stream(), frame);
    };
  });

  // draw-sample
  std::string dr_catalog, dr_frame, dr_population, dr_out = "-";
  auto* dr = app.add_subcommand("draw-sample", "extract the planned stations' returns from a census");
  dr->add_option("--catalog", dr_catalog, "electoral catalog (JSON)")->required()->check(CLI::ExistingFile);
  dr->add_option("--frame", dr_frame, "frame with a planned sample (CSV)")->required()->check(CLI::ExistingFile);
  dr->add_option("--population", dr_population, "census of station returns (CSV)")->required()->check(CLI::ExistingFile);
  dr->add_option("--out", dr_out, "returns CSV ('-' for stdout)");
  dr->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(dr_catalog);
      const auto frame = load_frame(dr_frame, catalog);
      if (frame.planned_size() == 0) throw DesignError("frame has no planned sample; run allocate first");
      std::vector<StationReturn> sample;
      for (const auto& r : read_returns(catalog, dr_population, &frame)) {
        const auto i = frame.find(r.key);
        if (i && frame.station(*i).in_sample) sample.push_back(r);
      }
      Output out(dr_out);
      write_returns(out.stream(), catalog, sample);
    };
  });

  // replay
  Common rp;
  std::string rp_log, rp_clusters, rp_cadence = "5m", rp_methods = "bayes,mi", rp_plot, rp_audit;
  ReplayOptions rp_opt;
  auto* rpl = app.add_subcommand("replay", "rerun the estimators at every update of an arrival log");
  add_common(rpl, rp);
  rpl->add_option("--log", rp_log, "arrival log (CSV)")->required()->check(CLI::ExistingFile);
  rpl->add_option("--clusters", rp_clusters, "clustering hierarchy (CSV)")->check(CLI::ExistingFile);
  rpl->add_option("--cadence", rp_cadence, "update interval, e.g. 300s, 5m, 1h");
  rpl->add_option("--methods", rp_methods, "comma-separated: bayes, mi");
  rpl->add_option("--draws", rp_opt.draws, "posterior draws")->check(CLI::PositiveNumber);
  rpl->add_option("--B", rp_opt.replicates, "bootstrap replicates")->check(CLI::PositiveNumber);
  rpl->add_option("--m", rp_opt.mi.m, "completed datasets")->check(CLI::PositiveNumber);
  rpl->add_option("--iters", rp_opt.mi.iterations, "chained-equation sweeps")->check(CLI::PositiveNumber);
  rpl->add_option("--donors", rp_opt.mi.donors, "predictive-mean-matching donors")->check(CLI::PositiveNumber);
  rpl->add_option("--level", rp_opt.frequentist_level, "MI interval level")->check(CLI::Range(0.0, 1.0));
  rpl->add_option("--plot-data", rp_plot, "long-format plot data (CSV)");
  rpl->add_option("--audit", rp_audit, "rejected log events (CSV)");
  rpl->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(rp.catalog);
      const auto frame = load_frame(rp.frame, catalog);
      const auto log = read_arrival_log(catalog, read_csv_file(rp_log), rp_log, &frame);
      rp_opt.cadence = parse_duration(rp_cadence);
      rp_opt.bayes = rp_opt.frequentist = false;
      for (const auto& m : split(rp_methods, ',')) {
        if (m == "bayes") rp_opt.bayes = true;
        else if (m == "mi") rp_opt.frequentist = true;
        else throw InputError("unknown method '" + m + "' (bayes, mi)");
      }
      rp_opt.seed = rp.seed;
      rp_opt.workers = rp.workers;
      if (!rp_clusters.empty()) rp_opt.hierarchy = read_hierarchy(rp_clusters);
      const auto res = replay(catalog, frame, log, rp_opt);
      warn(res.warnings);
      for (const auto& t : res.ticks)
        for (const auto& n : t.notes) std::cerr << format_timestamp(t.time) << ": " << n << '\n';
      if (!res.audit.empty()) std::cerr << res.audit.size() << " log events rejected\n";
      Output out(rp.out);
      write_series(out.stream(), catalog, res);
      if (!rp_plot.empty()) {
        Output plot(rp_plot);
        write_plot_data(plot.stream(), catalog, res);
      }
      if (!rp_audit.empty()) {
        Output audit(rp_audit);
        write_audit(audit.stream(), res.audit);
      }
    };
  });

  // simulate-arrival
  Common sa;
  std::string sa_sample, sa_bias, sa_start = "2021-06-06T18:30:00Z";
  auto* sar = app.add_subcommand("simulate-arrival", "synthetic arrival log with delays biased by station traits");
  add_common(sar, sa);
  sar->add_option("--sample", sa_sample, "returns of the stations that will report (CSV)")
      ->required()
      ->check(CLI::ExistingFile);
  sar->add_option("--bias", sa_bias, "delay model, e.g. list=0.5,rural=0.4,west=0.3,mean=90,shape=4");
  sar->add_option("--start", sa_start, "time polls close (ISO-8601 UTC)");
  sar->callback([&] {
    run = [&] {
      const auto catalog = Catalog::load(sa.catalog);
      const auto frame = load_frame(sa.frame, catalog);
      const auto sample = read_returns(catalog, sa_sample, &frame);
      const auto log = simulate_arrival(frame, sample, parse_bias(sa_bias), parse_timestamp(sa_start), sa.seed);
      Output out(sa.out);
      write_arrival_log(out.stream(), catalog, log);
    };
  });

  // simulate-population
  int sp_districts = 300, sp_stations = 50;
  std::string sp_layout = "mexico", sp_catalog, sp_frame, sp_population, sp_historic;
  std::uint64_t sp_seed = 1;
  PopulationConfig sp_cfg;
  auto* sp = app.add_subcommand("simulate-population", "synthetic catalog, frame and census of returns");
  sp->add_option("--districts", sp_districts, "districts (multiple of 3; 300 with the mexico layout)")
      ->check(CLI::PositiveNumber);
  sp->add_option("--stations", sp_stations, "stations per district")->check(CLI::PositiveNumber);
  sp->add_option("--layout", sp_layout, "regional layout")->check(CLI::IsMember({"mexico", "flat"}));
  std::string sp_shares;
  sp->add_option("--turnout", sp_cfg.turnout, "mean turnout")->check(CLI::Range(0.0, 1.0));
  sp->add_option("--shares", sp_shares, "ballot shares overriding the defaults, e.g. PA=0.24,PB=0.21");
  sp->add_option("--stratum-concentration", sp_cfg.stratum_concentration,
                 "Dirichlet concentration of district shares (lower: more regional variation)")
      ->check(CLI::PositiveNumber);
  sp->add_option("--seed", sp_seed, "master seed");
  sp->add_option("--catalog-out", sp_catalog, "catalog JSON")->required();
  sp->add_option("--frame-out", sp_frame, "frame CSV")->required();
  sp->add_option("--population-out", sp_population, "census returns CSV")->required();
  sp->add_option("--historic-out", sp_historic, "per-district totals for clustering (CSV)");
  sp->callback([&] {
    run = [&] {
      if (sp_layout == "mexico" && sp_districts != 300) throw InputError("the mexico layout has 300 districts");
      const auto catalog = synthetic_catalog(sp_districts);
      FrameConfig fc;
      fc.strata = sp_districts;
      fc.stations_per_stratum = sp_stations;
      if (sp_layout == "mexico") fc.layout = mexico_layout();
      const auto frame = synthetic_frame(fc, sp_seed);
      sp_cfg.national_shares = synthetic_shares(catalog);
      for (const auto& kv : split(sp_shares, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("share '" + kv + "' is not option=value");
        const auto o = catalog.find_option(kv.substr(0, eq));
        if (!o) throw InputError("unknown ballot option '" + kv.substr(0, eq) + "'");
        sp_cfg.national_shares[*o] = detail::parse_double(kv.substr(eq + 1), "--shares");
      }
      const auto pop = synthetic_population(catalog, frame, sp_cfg, sp_seed);
      {
        Output out(sp_catalog);
        out.stream() << catalog.to_json().dump(2) << '\n';
      }
      {
        Output out(sp_frame);
        write_frame(out.stream(), frame);
      }
      {
        Output out(sp_population);
        write_returns(out.stream(), catalog, pop);
      }
      if (!sp_historic.empty()) {
        Output out(sp_historic);
        std::vector<std::string> header{"stratum_id", "nominal_list"};
        for (OptionIndex o = 0; o < catalog.num_ballot_options(); ++o) header.push_back(catalog.option(o).id);
        write_csv_row(out.stream(), header);
        const auto totals = population_totals(catalog, frame, pop);
        for (std::size_t h = 0; h < frame.num_strata(); ++h) {
          std::vector<std::string> row{std::to_string(frame.strata()[h]), format_number(frame.nominal_list(h))};
          for (OptionIndex o = 0; o < catalog.num_ballot_options(); ++o) row.push_back(format_number(totals(h, o)));
          write_csv_row(out.stream(), row);
        }
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    run();
  } catch (const CatalogError& e) {
    std::cerr << "catalog error: " << e.what() << '\n';
    return bad_input;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return bad_input;
  } catch (const DesignError& e) {
    std::cerr << "design error: " << e.what() << '\n';
    return bad_design;
  } catch (const MissingStratumError& e) {
    std::cerr << "missing stratum: " << e.what() << '\n';
    return missing_stratum;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return not_estimable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return ok;
}
