#include "hmhf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hmhf/errors.hpp"

namespace hmhf {

const std::vector<std::string> kTimeSeriesColumns = {
    "t", "E_total", "tension_l2_sq", "dissipation_cum", "lambda_min_est", "grad_max", "dt"};
const std::vector<std::string> kDeltaColumns = {"t",       "y_x",        "y_y",    "rho",
                                                "M",       "d_total",    "lambda_max",
                                                "E_disc",  "resolved"};
const std::vector<std::string> kCollisionColumns = {
    "sigma", "tau", "y_x", "y_y", "rho", "K_level", "duration", "duration_over_lambdamax_sq"};

std::uint64_t fnv1a_64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void write_header(std::ostream& out, const CsvHeader& h, const std::vector<std::string>& cols) {
  out << "# hmhf " << h.kind << "\n";
  out << "# version: " << h.version << "\n";
  out << "# config_hash: " << hash_hex(h.config_hash) << "\n";
  out << "# seed: " << h.seed << "\n";
  for (const auto& [k, v] : h.extras) out << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
}

template <typename... Cells>
void write_row(std::ostream& out, const Cells&... cells) {
  bool first = true;
  ((out << (first ? "" : ",") << cells, first = false), ...);
  out << "\n";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw FormatError("missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return parse_double(rows.at(row).at(column(name)));
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos)
        t.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      else if (line.rfind("# hmhf ", 0) == 0)
        t.meta["kind"] = trim(line.substr(7));
      continue;
    }
    auto cells = split(line);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << t.columns.size() << " cells, found "
          << cells.size();
      throw FormatError(msg.str());
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.columns.empty()) throw FormatError("csv has no column line");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_time_series_csv(std::ostream& out, const TimeSeries& series, const CsvHeader& header) {
  write_header(out, header, kTimeSeriesColumns);
  for (const auto& r : series.records)
    write_row(out, format_double(r.t), format_double(r.energy), format_double(r.tension_l2_sq),
              format_double(r.dissipation_cum), format_double(r.lambda_min_est),
              format_double(r.grad_max), format_double(r.dt));
}

TimeSeries time_series_from_csv(const CsvTable& table) {
  TimeSeries s;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    TimeRecord r;
    r.t = table.number(i, "t");
    r.energy = table.number(i, "E_total");
    r.tension_l2_sq = table.number(i, "tension_l2_sq");
    r.dissipation_cum = table.number(i, "dissipation_cum");
    r.lambda_min_est = table.number(i, "lambda_min_est");
    r.grad_max = table.number(i, "grad_max");
    r.dt = table.number(i, "dt");
    s.records.push_back(r);
  }
  return s;
}

void write_delta_csv(std::ostream& out, const DeltaSeries& series, const CsvHeader& header) {
  CsvHeader h = header;
  h.extras.insert(h.extras.begin(), {"t_plus", format_double(series.t_plus)});
  h.extras.insert(h.extras.begin(), {"mode", to_string(series.mode)});
  h.extras.emplace_back("note", "d_total is a fitted upper bound: large values only show distance "
                                "from the searched bubble family");
  write_header(out, h, kDeltaColumns);
  for (const auto& r : series.records)
    write_row(out, format_double(r.t), format_double(r.y.x), format_double(r.y.y),
              format_double(r.rho), r.m, format_double(r.d_total), format_double(r.lambda_max),
              format_double(r.energy), r.resolved ? 1 : 0);
}

DeltaSeries delta_series_from_csv(const CsvTable& table) {
  DeltaSeries s;
  const auto mode = table.meta.find("mode");
  if (mode == table.meta.end()) throw FormatError("delta csv lacks a mode line");
  if (mode->second == "blow-up")
    s.mode = DeltaMode::blowup;
  else if (mode->second == "global")
    s.mode = DeltaMode::global;
  else
    throw FormatError("unknown delta mode '" + mode->second + "'");
  const auto tp = table.meta.find("t_plus");
  s.t_plus = tp == table.meta.end() ? 0.0 : parse_double(tp->second);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    DeltaRecord r;
    r.t = table.number(i, "t");
    r.y = {table.number(i, "y_x"), table.number(i, "y_y")};
    r.rho = table.number(i, "rho");
    r.m = static_cast<std::size_t>(table.number(i, "M"));
    r.d_total = table.number(i, "d_total");
    r.lambda_max = table.number(i, "lambda_max");
    r.energy = table.number(i, "E_disc");
    r.resolved = table.number(i, "resolved") != 0.0;
    s.records.push_back(r);
  }
  return s;
}

void write_collision_csv(std::ostream& out, const std::vector<CollisionInterval>& intervals,
                         const DeltaSeries& series, const CsvHeader& header) {
  CsvHeader h = header;
  h.extras.emplace_back("note", "detected on the fitted upper bound of delta, not delta itself");
  write_header(out, h, kCollisionColumns);
  for (const auto& c : intervals) {
    const double lam = c.sigma_index < series.records.size()
                           ? series.records[c.sigma_index].lambda_max
                           : std::numeric_limits<double>::quiet_NaN();
    const double ratio = lam > 0.0 ? c.duration() / (lam * lam)
                                   : std::numeric_limits<double>::infinity();
    write_row(out, format_double(c.sigma), format_double(c.tau), format_double(c.y.x),
              format_double(c.y.y), format_double(c.rho), c.k_level, format_double(c.duration()),
              format_double(ratio));
  }
}

void write_quantization_csv(std::ostream& out, const QuantizationReport& report,
                            const CsvHeader& header) {
  CsvHeader h = header;
  h.extras.emplace_back("tolerance", format_double(report.tolerance));
  std::string hist;
  for (std::size_t i = 0; i < report.histogram.size(); ++i)
    hist += (i ? " " : "") + std::to_string(report.histogram[i]);
  h.extras.emplace_back("histogram", hist);
  write_header(out, h, {"t", "K", "deviation", "within_tolerance"});
  for (const auto& e : report.entries)
    write_row(out, format_double(e.t), e.k, format_double(e.deviation), e.within_tolerance ? 1 : 0);
}

void write_duration_csv(std::ostream& out, const DurationReport& report, const CsvHeader& header) {
  CsvHeader h = header;
  h.extras.emplace_back("c0", format_double(report.c0));
  h.extras.emplace_back("flagged", std::to_string(report.flagged));
  write_header(out, h, {"duration", "lambda_max", "ratio", "below_floor"});
  for (const auto& e : report.entries)
    write_row(out, format_double(e.duration), format_double(e.lambda_max), format_double(e.ratio),
              e.below_floor ? 1 : 0);
}

void write_fit_report(std::ostream& out, double t, const Disc& disc, Gamma0 gamma0,
                      const FitResult& fit) {
  const auto d = [](double v) { return format_double(v); };
  const auto& c = fit.config;
  out << "fit t " << d(t) << " y " << d(disc.center.x) << " " << d(disc.center.y) << " rho "
      << d(disc.radius) << " gamma0 " << d(gamma0.value()) << "\n";
  out << "M " << c.size() << " converged " << (fit.converged ? 1 : 0) << " omega "
      << d(c.omega.x) << " " << d(c.omega.y) << " " << d(c.omega.z) << "\n";
  out << "radii nu " << d(fit.radii.nu) << " xi " << d(fit.radii.xi) << "\n";
  for (std::size_t j = 0; j < c.size(); ++j) {
    const auto& b = c.bubbles[j];
    const ScaleResult s = bubble_scale(b, gamma0);
    out << "bubble " << j << " degree " << b.degree() << " center " << d(s.center.x) << " "
        << d(s.center.y) << " scale " << d(s.scale) << " profile_scale "
        << d(b.shape() ? b.shape()->scale : s.scale) << " reflected "
        << (b.shape() && b.shape()->reflected ? 1 : 0) << " nu_j " << d(fit.radii.nu_j.at(j))
        << " xi_j " << d(fit.radii.xi_j.at(j)) << "\n";
  }
  const auto& r = fit.report;
  out << "terms " << d(r.energy_mismatch) << " " << d(r.bubble_sup) << " " << d(r.neck_sup) << " "
      << d(r.neck_energy) << " " << d(r.radii_ratio) << " " << d(r.separation) << " "
      << d(r.containment) << " " << d(r.nested) << "\n";
  out << "total " << d(r.total) << "\n\n";
}

}  // namespace hmhf
