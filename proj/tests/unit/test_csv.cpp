#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hmhf/csv.hpp"
#include "hmhf/errors.hpp"

using namespace hmhf;

namespace {

CsvHeader header(const std::string& kind) {
  CsvHeader h;
  h.kind = kind;
  h.config_hash = 0x0123456789abcdefULL;
  h.seed = 42;
  return h;
}

}  // namespace

TEST(Fnv1a, KnownValues) {
  EXPECT_EQ(fnv1a_64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a_64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(CsvHeader, CarriesProvenanceFields) {
  std::stringstream s;
  TimeSeries ts;
  ts.records.push_back({0.0, 1.0, 2.0, 0.0, 0.5, 3.0, 1e-3});
  write_time_series_csv(s, ts, header("time_series"));
  const CsvTable t = read_csv(s);
  EXPECT_EQ(t.meta.at("kind"), "time_series");
  EXPECT_EQ(t.meta.at("version"), HMHF_VERSION);
  EXPECT_EQ(t.meta.at("config_hash"), "0123456789abcdef");
  EXPECT_EQ(t.meta.at("seed"), "42");
  EXPECT_EQ(t.columns, kTimeSeriesColumns);
}

TEST(TimeSeriesCsv, RoundTripIsExact) {
  TimeSeries ts;
  for (int i = 0; i < 5; ++i)
    ts.records.push_back({0.1 * i, 4 * M_PI / (1 + i), 1.0 / 3.0 * i, 1e-7 * i, 0.2, 17.25, 1e-4});
  std::stringstream s;
  write_time_series_csv(s, ts, header("time_series"));
  const TimeSeries back = time_series_from_csv(read_csv(s));
  ASSERT_EQ(back.records.size(), ts.records.size());
  for (std::size_t i = 0; i < ts.records.size(); ++i) {
    EXPECT_EQ(back.records[i].t, ts.records[i].t);
    EXPECT_EQ(back.records[i].energy, ts.records[i].energy);
    EXPECT_EQ(back.records[i].tension_l2_sq, ts.records[i].tension_l2_sq);
    EXPECT_EQ(back.records[i].dissipation_cum, ts.records[i].dissipation_cum);
    EXPECT_EQ(back.records[i].lambda_min_est, ts.records[i].lambda_min_est);
    EXPECT_EQ(back.records[i].grad_max, ts.records[i].grad_max);
    EXPECT_EQ(back.records[i].dt, ts.records[i].dt);
  }
}

TEST(DeltaCsv, RoundTripKeepsUnresolvedRecords) {
  DeltaSeries s;
  s.mode = DeltaMode::blowup;
  s.t_plus = 0.6986;
  DeltaRecord a;
  a.t = 0.1;
  a.y = {0.5, -0.25};
  a.rho = std::sqrt(s.t_plus - a.t);
  a.d_total = 0.125;
  a.lambda_max = 0.01;
  a.m = 2;
  a.energy = 8 * M_PI;
  DeltaRecord b = a;
  b.t = 0.2;
  b.resolved = false;
  b.d_total = std::nan("");
  s.records = {a, b};
  std::stringstream out;
  write_delta_csv(out, s, header("delta"));
  const DeltaSeries back = delta_series_from_csv(read_csv(out));
  EXPECT_EQ(back.mode, DeltaMode::blowup);
  EXPECT_EQ(back.t_plus, s.t_plus);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[0].d_total, a.d_total);
  EXPECT_EQ(back.records[0].y, a.y);
  EXPECT_EQ(back.records[0].m, 2u);
  EXPECT_EQ(back.records[0].energy, a.energy);
  EXPECT_TRUE(back.records[0].resolved);
  EXPECT_FALSE(back.records[1].resolved);
  EXPECT_TRUE(std::isnan(back.records[1].d_total));
}

TEST(ReadCsv, MalformedRowNamesLine) {
  std::stringstream in("# hmhf x\na,b\n1,2\n3\n");
  try {
    read_csv(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(ReadCsv, MissingColumnAndEmptyInput) {
  std::stringstream in("a,b\n1,2\n");
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.number(0, "b"), 2.0);
  EXPECT_THROW(t.column("c"), FormatError);
  std::stringstream empty("# only comments\n");
  EXPECT_THROW(read_csv(empty), FormatError);
  std::stringstream no_mode("t,y_x\n");
  EXPECT_THROW(delta_series_from_csv(read_csv(no_mode)), FormatError);
}

TEST(ReadCsvFile, ErrorNamesFile) {
  try {
    read_csv_file("/nonexistent/dir/x.csv");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("x.csv"), std::string::npos);
  }
}

TEST(QuantizationCsv, HistogramInHeader) {
  QuantizationReport r;
  r.histogram = {3, 1};
  r.entries.push_back({0.1, 1, 0.01, true});
  std::stringstream s;
  write_quantization_csv(s, r, header("quantization"));
  const CsvTable t = read_csv(s);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.number(0, "K"), 1.0);
  EXPECT_EQ(t.meta.at("histogram"), "3 1");
}
