#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hmhf/bubble_library.hpp"
#include "hmhf/collision_analysis.hpp"
#include "hmhf/flow_solver.hpp"

namespace hmhf {

std::uint64_t fnv1a_64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// Comment block written at the top of every CSV:
///   # hmhf <kind>
///   # version: ...
///   # config_hash: <16 hex digits>
///   # seed: ...
///   # <key>: <value>   (extras, in order)
struct CsvHeader {
  std::string kind;
  std::string version = HMHF_VERSION;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extras;
};

/// Parsed CSV: header comments, column names and raw cells.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // FormatError if absent
  double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

extern const std::vector<std::string> kTimeSeriesColumns;
extern const std::vector<std::string> kDeltaColumns;
extern const std::vector<std::string> kCollisionColumns;

void write_time_series_csv(std::ostream& out, const TimeSeries& series, const CsvHeader& header);
TimeSeries time_series_from_csv(const CsvTable& table);

/// t, y_x, y_y, rho, M, d_total, lambda_max, then E_disc and resolved. The
/// header carries mode and t_plus.
void write_delta_csv(std::ostream& out, const DeltaSeries& series, const CsvHeader& header);
DeltaSeries delta_series_from_csv(const CsvTable& table);

void write_collision_csv(std::ostream& out, const std::vector<CollisionInterval>& intervals,
                         const DeltaSeries& series, const CsvHeader& header);

/// t, K, deviation, within_tolerance; histogram counts go to the header.
void write_quantization_csv(std::ostream& out, const QuantizationReport& report,
                            const CsvHeader& header);

/// duration, lambda_max, ratio, below_floor.
void write_duration_csv(std::ostream& out, const DurationReport& report, const CsvHeader& header);

/// Structured text block for one fit:
///   fit t <t> y <x> <y> rho <rho> gamma0 <g>
///   M <m> converged <0|1> omega <x> <y> <z>
///   radii nu <nu> xi <xi>
///   bubble <j> degree <k> center <x> <y> scale <lambda> profile_scale <s>
///     reflected <0|1> nu_j <nu_j> xi_j <xi_j>
///   terms <the eight items of the report in declaration order>
///   total <d>
/// followed by an empty line.
void write_fit_report(std::ostream& out, double t, const Disc& disc, Gamma0 gamma0,
                      const FitResult& fit);

}  // namespace hmhf
