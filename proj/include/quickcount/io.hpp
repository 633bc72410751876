#pragma once

// Flat-file formats: frames, returns, historic results, clustering
// hierarchies, arrival logs and result tables, all as CSV with a header row.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "quickcount/catalog.hpp"
#include "quickcount/design.hpp"
#include "quickcount/errors.hpp"
#include "quickcount/poststrat.hpp"
#include "quickcount/replay.hpp"
#include "quickcount/sampleframe.hpp"
#include "quickcount/summary.hpp"

namespace quickcount {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  std::size_t require(std::string_view name, const std::string& what) const {
    auto c = column(name);
    if (!c) throw InputError(what + ": missing column '" + std::string(name) + "'");
    return *c;
  }
};

/// RFC 4180 reader: quoted fields may hold commas, quotes ("") and newlines.
/// A UTF-8 byte-order mark and CR line endings are tolerated; blank lines
/// are skipped.
inline CsvTable read_csv(std::istream& in, const std::string& what) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  CsvTable t;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1, row_line = 1;
  auto end_row = [&] {
    if (any || !field.empty() || !row.empty()) {
      row.push_back(std::move(field));
      if (t.header.empty()) {
        t.header = std::move(row);
      } else {
        if (row.size() != t.header.size())
          throw InputError(what + " line " + std::to_string(row_line) + ": expected " +
                           std::to_string(t.header.size()) + " fields, found " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
        t.lines.push_back(row_line);
      }
    }
    row.clear();
    field.clear();
    any = false;
    row_line = line + 1;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r': break;
      case '\n':
        end_row();
        ++line;
        break;
      default: field += c;
    }
  }
  if (quoted) throw InputError(what + ": unterminated quoted field");
  end_row();
  if (t.header.empty()) throw InputError(what + ": empty file (header row required)");
  for (auto& h : t.header) {
    const auto b = h.find_first_not_of(' ');
    const auto e = h.find_last_not_of(' ');
    h = b == std::string::npos ? std::string{} : h.substr(b, e - b + 1);
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in, path);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double x) {
  for (int p = 6; p < 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << x;
    if (std::strtod(t.str().c_str(), nullptr) == x) return t.str();
  }
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& raw, const std::string& where) {
  const auto s = trim(raw);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": '" + raw + "' is not an integer");
  }
  if (used != s.size()) throw InputError(where + ": '" + raw + "' is not an integer");
  return v;
}

inline double parse_double(const std::string& raw, const std::string& where) {
  const auto s = trim(raw);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": '" + raw + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError(where + ": '" + raw + "' is not a number");
  return v;
}

inline bool parse_flag(const std::string& raw, const std::string& where) {
  const auto s = trim(raw);
  if (s == "1" || s == "true" || s == "urban" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "rural" || s == "no") return false;
  throw InputError(where + ": '" + raw + "' is not a flag (1/0)");
}

inline bool is_missing_cell(const std::string& raw) {
  const auto s = trim(raw);
  return s.empty() || s == "NA" || s == "na" || s == "N/A";
}

inline std::string where(const std::string& what, const CsvTable& t, std::size_t r) {
  return what + " line " + std::to_string(t.lines[r]);
}

}  // namespace detail

/// Frame CSV: stratum_id, station_id, nominal_list, and optionally urban
/// (1/0, default 1), state, tz_offset (hours, default 0), in_sample (1/0).
inline Frame read_frame(const CsvTable& t, const std::string& what, int max_nominal_list = 750) {
  const auto cs = t.require("stratum_id", what), cr = t.require("station_id", what), cl = t.require("nominal_list", what);
  const auto cu = t.column("urban"), cst = t.column("state"), ctz = t.column("tz_offset"), cin = t.column("in_sample");
  std::vector<StationInfo> st;
  st.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto w = detail::where(what, t, r);
    StationInfo s;
    s.key = {static_cast<int>(detail::parse_int(row[cs], w)), detail::parse_int(row[cr], w)};
    s.nominal_list = static_cast<int>(detail::parse_int(row[cl], w));
    if (cu) s.urban = detail::parse_flag(row[*cu], w);
    if (cst) s.state = row[*cst];
    if (ctz) s.tz_offset = static_cast<int>(detail::parse_int(row[*ctz], w));
    if (cin) s.in_sample = detail::parse_flag(row[*cin], w);
    st.push_back(std::move(s));
  }
  return Frame(std::move(st), max_nominal_list);
}

inline Frame read_frame(const std::string& path, int max_nominal_list = 750) {
  return read_frame(read_csv_file(path), path, max_nominal_list);
}

inline void write_frame(std::ostream& out, const Frame& frame) {
  write_csv_row(out, {"stratum_id", "station_id", "nominal_list", "urban", "state", "tz_offset", "in_sample"});
  for (const auto& s : frame.stations())
    write_csv_row(out, {std::to_string(s.key.stratum), std::to_string(s.key.station), std::to_string(s.nominal_list),
                        s.urban ? "1" : "0", s.state, std::to_string(s.tz_offset), s.in_sample ? "1" : "0"});
}

/// Column of each ballot option in a returns-style table.
inline std::vector<std::size_t> option_columns(const Catalog& catalog, const CsvTable& t, const std::string& what) {
  std::vector<std::size_t> cols;
  for (OptionIndex o = 0; o < catalog.num_ballot_options(); ++o) cols.push_back(t.require(catalog.option(o).id, what));
  static const std::set<std::string> known{"timestamp", "stratum_id", "station_id", "nominal_list"};
  for (const auto& h : t.header) {
    if (known.count(h) || catalog.find_option(h)) continue;
    throw InputError(what + ": unknown column '" + h + "'");
  }
  return cols;
}

/// A returns row. Empty or NA vote cells are missing (not zero). Without a
/// nominal_list column the frame's value is used.
inline StationReturn parse_return(const CsvTable& t, std::size_t r,
                                  const std::vector<std::size_t>& cols, const Frame* frame, const std::string& what,
                                  bool unknown_ok = false) {
  const auto w = detail::where(what, t, r);
  const auto& row = t.rows[r];
  StationReturn ret;
  ret.key = {static_cast<int>(detail::parse_int(row[t.require("stratum_id", what)], w)),
             detail::parse_int(row[t.require("station_id", what)], w)};
  if (auto cl = t.column("nominal_list")) {
    ret.nominal_list = static_cast<int>(detail::parse_int(row[*cl], w));
  } else {
    if (!frame) throw InputError(what + ": missing column 'nominal_list'");
    const auto i = frame->find(ret.key);
    if (!i && !unknown_ok) throw InputError(w + ": station " + to_string(ret.key) + " is not in the frame");
    ret.nominal_list = i ? frame->station(*i).nominal_list : 0;
  }
  ret.votes.reserve(cols.size());
  for (std::size_t c : cols) {
    if (detail::is_missing_cell(row[c])) ret.votes.emplace_back(std::nullopt);
    else ret.votes.emplace_back(detail::parse_int(row[c], w));
  }
  return ret;
}

/// Returns CSV: stratum_id, station_id, optional nominal_list, one column per
/// ballot option (catalog ids). The abstention column, if present, is ignored.
inline std::vector<StationReturn> read_returns(const Catalog& catalog, const CsvTable& t, const std::string& what,
                                               const Frame* frame = nullptr) {
  const auto cols = option_columns(catalog, t, what);
  std::vector<StationReturn> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(parse_return(t, r, cols, frame, what));
  return out;
}

inline std::vector<StationReturn> read_returns(const Catalog& catalog, const std::string& path,
                                               const Frame* frame = nullptr) {
  return read_returns(catalog, read_csv_file(path), path, frame);
}

inline std::vector<std::string> returns_header(const Catalog& catalog) {
  std::vector<std::string> h{"stratum_id", "station_id", "nominal_list"};
  for (OptionIndex o = 0; o < catalog.num_ballot_options(); ++o) h.push_back(catalog.option(o).id);
  return h;
}

inline std::vector<std::string> return_fields(const StationReturn& r) {
  std::vector<std::string> f{std::to_string(r.key.stratum), std::to_string(r.key.station), std::to_string(r.nominal_list)};
  for (const auto& v : r.votes) f.push_back(v ? std::to_string(*v) : std::string{});
  return f;
}

inline void write_returns(std::ostream& out, const Catalog& catalog, const std::vector<StationReturn>& returns) {
  write_csv_row(out, returns_header(catalog));
  for (const auto& r : returns) write_csv_row(out, return_fields(r));
}

/// Historic results per stratum: stratum_id, nominal_list and any number of
/// vote columns.
inline std::vector<HistoricStratum> read_historic(const CsvTable& t, const std::string& what) {
  const auto cs = t.require("stratum_id", what), cl = t.require("nominal_list", what);
  std::vector<HistoricStratum> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto w = detail::where(what, t, r);
    HistoricStratum h;
    h.stratum = static_cast<int>(detail::parse_int(t.rows[r][cs], w));
    h.nominal_list = detail::parse_double(t.rows[r][cl], w);
    for (std::size_t c = 0; c < t.header.size(); ++c)
      if (c != cs && c != cl) h.votes.push_back(detail::parse_double(t.rows[r][c], w));
    out.push_back(std::move(h));
  }
  if (out.empty()) throw InputError(what + ": no strata");
  return out;
}

/// Hierarchy CSV: stratum_id then one column k<K> of group labels per level.
inline void write_hierarchy(std::ostream& out, const ClusteringHierarchy& h) {
  std::vector<std::string> header{"stratum_id"};
  for (int k : h.ks) header.push_back("k" + std::to_string(k));
  write_csv_row(out, header);
  for (std::size_t s = 0; s < h.num_strata(); ++s) {
    std::vector<std::string> row{std::to_string(h.strata[s])};
    for (std::size_t i = 0; i < h.ks.size(); ++i) row.push_back(std::to_string(h.labels[i][s]));
    write_csv_row(out, row);
  }
}

inline ClusteringHierarchy read_hierarchy(const CsvTable& t, const std::string& what) {
  const auto cs = t.require("stratum_id", what);
  ClusteringHierarchy h;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == cs) continue;
    const auto& name = t.header[c];
    if (name.size() < 2 || name[0] != 'k') throw InputError(what + ": unexpected column '" + name + "'");
    h.ks.push_back(static_cast<int>(detail::parse_int(name.substr(1), what + " header")));
    cols.push_back(c);
  }
  std::vector<std::pair<int, std::size_t>> order;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    order.push_back({static_cast<int>(detail::parse_int(t.rows[r][cs], detail::where(what, t, r))), r});
  std::sort(order.begin(), order.end());
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i].first == order[i - 1].first) throw InputError(what + ": duplicate stratum " + std::to_string(order[i].first));
  h.labels.assign(cols.size(), {});
  for (const auto& [id, r] : order) {
    h.strata.push_back(id);
    for (std::size_t i = 0; i < cols.size(); ++i)
      h.labels[i].push_back(static_cast<int>(detail::parse_int(t.rows[r][cols[i]], detail::where(what, t, r))));
  }
  for (std::size_t i = 1; i < h.ks.size(); ++i)
    if (h.ks[i] <= h.ks[i - 1]) throw InputError(what + ": levels must be listed in increasing order");
  return h;
}

inline ClusteringHierarchy read_hierarchy(const std::string& path) { return read_hierarchy(read_csv_file(path), path); }

/// ISO-8601 date-time in UTC: YYYY-MM-DDTHH:MM[:SS][Z] (a space may replace T).
inline std::int64_t parse_timestamp(const std::string& raw) {
  auto s = detail::trim(raw);
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  if (s.size() > 10 && s[10] == ' ') s[10] = 'T';
  std::tm tm{};
  std::istringstream in(s);
  in >> std::get_time(&tm, s.size() > 16 ? "%Y-%m-%dT%H:%M:%S" : "%Y-%m-%dT%H:%M");
  if (in.fail() || in.peek() != std::char_traits<char>::eof())
    throw InputError("'" + raw + "' is not an ISO-8601 timestamp");
  return static_cast<std::int64_t>(timegm(&tm));
}

inline std::string format_timestamp(std::int64_t t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

/// Arrival log CSV: timestamp then the returns columns.
inline std::vector<ArrivalEvent> read_arrival_log(const Catalog& catalog, const CsvTable& t, const std::string& what,
                                                  const Frame* frame = nullptr) {
  const auto ct = t.require("timestamp", what);
  const auto cols = option_columns(catalog, t, what);
  std::vector<ArrivalEvent> log;
  log.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ArrivalEvent ev;
    try {
      ev.time = parse_timestamp(t.rows[r][ct]);
    } catch (const InputError& e) {
      throw InputError(detail::where(what, t, r) + ": " + e.what());
    }
    // unknown stations stay in the log for the audit trail
    ev.ret = parse_return(t, r, cols, frame, what, true);
    log.push_back(std::move(ev));
  }
  return log;
}

inline void write_arrival_log(std::ostream& out, const Catalog& catalog, const std::vector<ArrivalEvent>& log) {
  auto header = returns_header(catalog);
  header.insert(header.begin(), "timestamp");
  write_csv_row(out, header);
  for (const auto& ev : log) {
    auto f = return_fields(ev.ret);
    f.insert(f.begin(), format_timestamp(ev.time));
    write_csv_row(out, f);
  }
}

/// Seat table: force, kind, lower, upper, point, level, method.
inline void write_seat_estimates(std::ostream& out, const Catalog& catalog, const std::vector<SeatEstimate>& est,
                                 double level, const std::string& method) {
  write_csv_row(out, {"method", "force", "kind", "level", "lower", "upper", "point", "variance"});
  for (const auto& e : est)
    write_csv_row(out, {method, catalog.force(e.force).id, std::string(to_string(catalog.force(e.force).kind)),
                        format_number(level), std::to_string(e.interval.lower), std::to_string(e.interval.upper),
                        format_number(e.mean), format_number(e.variance)});
}

/// Pooled MI table: the seat-table columns plus the Rubin components.
inline void write_mi_estimates(std::ostream& out, const Catalog& catalog, const std::vector<PooledEstimate>& est,
                               double level) {
  write_csv_row(out, {"method", "force", "kind", "level", "lower", "upper", "point", "variance", "within", "between",
                      "df", "m"});
  for (const auto& e : est)
    write_csv_row(out, {"mi", catalog.force(e.force).id, std::string(to_string(catalog.force(e.force).kind)),
                        format_number(level), std::to_string(e.seats.lower), std::to_string(e.seats.upper),
                        format_number(e.q_bar), format_number(e.t_var), format_number(e.w_bar), format_number(e.b_var),
                        std::isfinite(e.df) ? format_number(e.df) : "inf", std::to_string(e.m)});
}

/// Per-district winner probabilities in long form: district, force, probability.
inline void write_winner_probabilities(std::ostream& out, const Catalog& catalog, const std::vector<int>& districts,
                                       const Table& p) {
  write_csv_row(out, {"district", "force", "probability"});
  for (std::size_t h = 0; h < p.rows(); ++h)
    for (ForceIndex f = 0; f < p.cols(); ++f)
      if (p(h, f) > 0.0) write_csv_row(out, {std::to_string(districts[h]), catalog.force(f).id, format_number(p(h, f))});
}

inline void write_error_bounds(std::ostream& out, const std::vector<ErrorBound>& bounds) {
  write_csv_row(out, {"n", "n_h", "eps1", "eps2", "level", "reps", "failed", "note"});
  for (const auto& b : bounds)
    write_csv_row(out, {std::to_string(b.n), std::to_string(b.n_h), b.skipped ? "" : format_number(b.eps1),
                        b.skipped ? "" : format_number(b.eps2), format_number(b.level), std::to_string(b.reps),
                        std::to_string(b.failed), b.note});
}

/// Interval series, one row per tick, method and force.
inline void write_series(std::ostream& out, const Catalog& catalog, const ReplayResult& res) {
  write_csv_row(out, {"tick", "timestamp", "received", "planned", "strata_with_data", "imputed_strata", "method", "force",
                      "level", "lower", "upper", "point"});
  std::map<std::size_t, const TickSummary*> ticks;
  for (const auto& t : res.ticks) ticks[t.tick] = &t;
  for (const auto& r : res.rows) {
    const auto& t = *ticks.at(r.tick);
    write_csv_row(out, {std::to_string(r.tick), format_timestamp(r.time), std::to_string(t.received),
                        std::to_string(t.planned), std::to_string(t.strata_with_data), std::to_string(t.imputed_strata),
                        r.method, catalog.force(r.force).id, format_number(r.level), format_number(r.lower),
                        format_number(r.upper), format_number(r.point)});
  }
}

/// Long-format plot data: arrival counts per tick and every interval bound.
inline void write_plot_data(std::ostream& out, const Catalog& catalog, const ReplayResult& res) {
  write_csv_row(out, {"timestamp", "series", "force", "value"});
  for (const auto& t : res.ticks) {
    const auto ts = format_timestamp(t.time);
    write_csv_row(out, {ts, "received", "", std::to_string(t.received)});
    write_csv_row(out, {ts, "strata_with_data", "", std::to_string(t.strata_with_data)});
  }
  for (const auto& r : res.rows) {
    const auto ts = format_timestamp(r.time);
    const auto& id = catalog.force(r.force).id;
    write_csv_row(out, {ts, r.method + "_lower", id, format_number(r.lower)});
    write_csv_row(out, {ts, r.method + "_upper", id, format_number(r.upper)});
    write_csv_row(out, {ts, r.method + "_point", id, format_number(r.point)});
  }
}

inline void write_audit(std::ostream& out, const std::vector<AuditRecord>& audit) {
  write_csv_row(out, {"timestamp", "stratum_id", "station_id", "reason"});
  for (const auto& a : audit)
    write_csv_row(out, {format_timestamp(a.time), std::to_string(a.key.stratum), std::to_string(a.key.station), a.reason});
}

}  // namespace quickcount
