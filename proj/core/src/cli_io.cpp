#include "hmhf/cli_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hmhf/csv.hpp"
#include "hmhf/errors.hpp"
#include "hmhf/snapshot_io.hpp"

namespace hmhf {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

CsvHeader header_for(const RunConfig& cfg, std::string kind) {
  CsvHeader h;
  h.kind = std::move(kind);
  h.config_hash = cfg.hash();
  h.seed = cfg.seed;
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw FormatError("error writing " + path.string());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  write_text(path, buf.str());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%05zu.bin", i);
  return buf;
}

double json_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

// Removes what a failed run wrote; leaves pre-existing content alone.
class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {}
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);
  }

  void make_dirs(const fs::path& p) {
    std::vector<fs::path> missing;
    for (fs::path q = p; !q.empty() && !fs::exists(q); q = q.parent_path()) {
      missing.push_back(q);
      if (q == q.parent_path()) break;
    }
    fs::create_directories(p);
    dirs_.insert(dirs_.end(), missing.rbegin(), missing.rend());
  }
  void track(const fs::path& file) { files_.push_back(file); }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;
  bool committed_ = false;
};

}  // namespace

fs::path default_output_root() {
  if (const char* env = std::getenv("HMHF_OUTPUT_ROOT"); env && *env) return env;
  return "hmhf_runs";
}

fs::path resolve_output_dir(const RunConfig& cfg, const std::optional<fs::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return default_output_root() / cfg.label;
}

SimulateOutcome simulate(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  SimulateOutcome out;
  out.dir = dir;
  validate_run_config(cfg);
  const SphereField u0 = make_initial_field(cfg);
  const double e0 = dirichlet_energy(u0);
  const Gamma0 gamma0 = effective_gamma0(cfg, e0);

  OutputGuard guard(dir);
  try {
    guard.make_dirs(dir / run_files::snapshot_dir);
    const fs::path probe = dir / ".write_probe";
    {
      std::ofstream p(probe);
      if (!p) throw FormatError("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_io;
    return out;
  }

  try {
    std::vector<std::pair<std::size_t, double>> index;
    auto sink = [&](const Snapshot& s) {
      const fs::path file = dir / run_files::snapshot_dir / snapshot_name(index.size());
      guard.track(file);
      write_snapshot_file(file, s.field);
      index.emplace_back(index.size(), s.t);
    };
    out.result = run_flow(u0, cfg.flow, sink);
    out.snapshot_count = index.size();

    const CsvHeader base = header_for(cfg, "");
    auto header = [&](const char* kind) {
      CsvHeader h = base;
      h.kind = kind;
      return h;
    };

    guard.track(dir / run_files::time_series);
    write_file(dir / run_files::time_series, [&](std::ostream& o) {
      write_time_series_csv(o, out.result->series, header("time-series"));
    });

    guard.track(dir / run_files::snapshot_index);
    write_file(dir / run_files::snapshot_index, [&](std::ostream& o) {
      o << "# hmhf snapshot-index\n# version: " << HMHF_VERSION
        << "\n# config_hash: " << hash_hex(base.config_hash) << "\n# seed: " << base.seed
        << "\nindex,t,file\n";
      for (const auto& [i, t] : index) o << i << "," << format_double(t) << "," << snapshot_name(i) << "\n";
    });

    const auto& v = out.result->verdict;
    json j;
    j["version"] = HMHF_VERSION;
    j["config_hash"] = hash_hex(base.config_hash);
    j["seed"] = cfg.seed;
    j["label"] = cfg.label;
    j["verdict"] = to_string(v.kind);
    j["t_plus"] = std::isfinite(v.t_plus) ? json(v.t_plus) : json(nullptr);
    j["point"] = {v.point.x, v.point.y};
    j["message"] = v.message;
    j["final_time"] = out.result->final_state.t;
    j["initial_energy"] = e0;
    j["final_energy"] = out.result->series.records.back().energy;
    j["gamma0"] = gamma0.value();
    j["steps"] = out.result->final_state.step_count;
    guard.track(dir / run_files::verdict);
    write_text(dir / run_files::verdict, j.dump(2) + "\n");

    guard.track(dir / run_files::config);
    write_text(dir / run_files::config, "# hmhf config\n# version: " + std::string(HMHF_VERSION) +
                                            "\n# config_hash: " + hash_hex(base.config_hash) +
                                            "\n# seed: " + std::to_string(cfg.seed) + "\n" +
                                            cfg.canonical());
  } catch (const FormatError& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_io;
    return out;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_io;
    return out;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_failure;
    return out;
  }
  guard.commit();
  log << cfg.label << ": " << to_string(out.result->verdict.kind) << " at t = "
      << out.result->final_state.t << " (" << out.snapshot_count << " snapshots) -> "
      << dir.string() << "\n";
  return out;
}

int cmd_simulate(const fs::path& config_path, const std::optional<fs::path>& out_dir,
                 std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
    validate_run_config(cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  }
  try {
    return simulate(cfg, resolve_output_dir(cfg, out_dir), log).status;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

std::vector<Snapshot> load_run_snapshots(const fs::path& run_dir) {
  const fs::path index_path = run_dir / run_files::snapshot_index;
  if (!fs::exists(index_path)) throw FormatError("no snapshot index at " + index_path.string());
  const CsvTable table = read_csv_file(index_path);
  const std::size_t file_col = table.column("file");
  std::vector<Snapshot> snaps;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const fs::path file = run_dir / run_files::snapshot_dir / table.rows[i][file_col];
    snaps.push_back({table.number(i, "t"), read_snapshot_file(file)});
  }
  if (snaps.empty()) throw FormatError(index_path.string() + " lists no snapshots");
  return snaps;
}

AnalysisOutcome analyze(const fs::path& run_dir, const AnalyzeOptions& opts, std::ostream& log) {
  AnalysisOutcome out;
  RunConfig cfg;
  json verdict;
  std::vector<Snapshot> snaps;
  try {
    cfg = load_run_config(run_dir / run_files::config);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    out.status = exit_config;
    return out;
  }
  try {
    verdict = read_json(run_dir / run_files::verdict);
    snaps = load_run_snapshots(run_dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_io;
    return out;
  }

  try {
    const double e0 = dirichlet_energy(snaps.front().field);
    Gamma0 gamma0 = effective_gamma0(cfg, e0);
    if (opts.gamma0) {
      Gamma0::check_flow(*opts.gamma0, e0);
      gamma0 = Gamma0(*opts.gamma0);
    }
    std::vector<Snapshot> used;
    for (std::size_t i = 0; i < snaps.size(); ++i)
      if (i % cfg.analysis.fit_every == 0 || i + 1 == snaps.size()) used.push_back(snaps[i]);

    const std::string kind = verdict.at("verdict").get<std::string>();
    DeltaMode mode = kind == to_string(VerdictKind::blowup_detected) ? DeltaMode::blowup
                                                                     : DeltaMode::global;
    if (cfg.analysis.mode == "blow-up") mode = DeltaMode::blowup;
    if (cfg.analysis.mode == "global") mode = DeltaMode::global;
    const double t_plus = json_number(verdict, "t_plus");

    CollisionOptions co;
    co.epsilon = cfg.analysis.epsilon;
    co.eta = cfg.analysis.eta;
    co.quantization_tolerance = cfg.analysis.quantization_tolerance;

    const std::vector<Point2>& discs = opts.discs.empty() ? cfg.analysis.discs : opts.discs;
    for (std::size_t i = 0; i < discs.size(); ++i) {
      std::ostringstream fits;
      DeltaOptions dopts;
      dopts.on_fit = [&](const DeltaRecord& r, const FitResult& f) {
        write_fit_report(fits, r.t, {r.y, r.rho}, gamma0, f);
      };
      DeltaSeries s = build_delta_series(used, discs[i], mode, t_plus, gamma0, dopts);
      const auto intervals = detect_collisions(s, co);
      const auto durations = duration_law_check(intervals, s, cfg.analysis.c0);
      const auto quant = quantization_check(s, co.quantization_tolerance);

      auto header = [&](const char* what) {
        CsvHeader h = header_for(cfg, what);
        h.extras.emplace_back("disc", std::to_string(i));
        h.extras.emplace_back("gamma0", format_double(gamma0.value()));
        return h;
      };
      const std::string n = std::to_string(i);
      write_file(run_dir / ("delta_" + n + ".csv"),
                 [&](std::ostream& o) { write_delta_csv(o, s, header("delta")); });
      write_text(run_dir / ("fits_" + n + ".txt"),
                 "# hmhf fits\n# version: " + std::string(HMHF_VERSION) + "\n# config_hash: " +
                     hash_hex(cfg.hash()) + "\n# seed: " + std::to_string(cfg.seed) + "\n" +
                     fits.str());
      write_file(run_dir / ("collisions_" + n + ".csv"), [&](std::ostream& o) {
        write_collision_csv(o, intervals, s, header("collisions"));
      });
      write_file(run_dir / ("durations_" + n + ".csv"),
                 [&](std::ostream& o) { write_duration_csv(o, durations, header("durations")); });
      write_file(run_dir / ("quantization_" + n + ".csv"), [&](std::ostream& o) {
        write_quantization_csv(o, quant, header("quantization"));
      });
      log << "disc " << i << " (" << discs[i].x << ", " << discs[i].y << "): " << s.records.size()
          << " records, " << intervals.size() << " collision intervals\n";
      out.series.push_back(std::move(s));
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    out.status = exit_config;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    out.status = exit_failure;
  }
  return out;
}

int cmd_analyze(const fs::path& run_dir, const AnalyzeOptions& opts, std::ostream& log) {
  return analyze(run_dir, opts, log).status;
}

int cmd_fit_bubbles(const fs::path& snapshot, const Disc& disc, double gamma0, double t,
                    const fs::path& out_csv, std::ostream& log) {
  try {
    const SphereField u = read_snapshot_file(snapshot);
    const Gamma0 g(gamma0);
    const ExtractionSet seeds = extract_bubbles(u, disc);
    const FitResult fit = fit_config(u, disc, seeds, g);
    DeltaSeries s;
    s.mode = DeltaMode::global;
    DeltaRecord r;
    r.t = t;
    r.y = disc.center;
    r.rho = disc.radius;
    r.d_total = fit.report.total;
    r.lambda_max = fit.lambda_max;
    r.m = fit.config.size();
    r.energy = dirichlet_energy(u, disc).value;
    s.records.push_back(r);
    CsvHeader h;
    h.kind = "fit";
    h.config_hash = fnv1a_64(snapshot.filename().string());
    h.extras.emplace_back("snapshot", snapshot.filename().string());
    h.extras.emplace_back("gamma0", format_double(gamma0));
    write_file(out_csv, [&](std::ostream& o) { write_delta_csv(o, s, h); });
    fs::path report = out_csv;
    report.replace_extension(".txt");
    write_file(report, [&](std::ostream& o) {
      o << "# hmhf fits\n# version: " << HMHF_VERSION << "\n# config_hash: "
        << hash_hex(h.config_hash) << "\n# seed: 0\n";
      write_fit_report(o, t, disc, g, fit);
    });
    log << "M = " << r.m << ", d_total = " << r.d_total << "\n";
    for (std::size_t j = 0; j < fit.config.size(); ++j) {
      const auto& b = fit.config.bubbles[j];
      log << "  bubble " << j << ": degree " << b.degree() << ", center (" << b.center().x << ", "
          << b.center().y << "), scale " << b.scale() << "\n";
    }
    return exit_ok;
  } catch (const FormatError& e) {
    log << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int cmd_detect_collisions(const fs::path& delta_csv, const CollisionOptions& opts, double c0,
                          const fs::path& out_prefix, std::ostream& log) {
  try {
    const CsvTable table = read_csv_file(delta_csv);
    const DeltaSeries s = delta_series_from_csv(table);
    const auto intervals = detect_collisions(s, opts);
    const auto durations = duration_law_check(intervals, s, c0);
    CsvHeader h;
    h.kind = "collisions";
    if (auto it = table.meta.find("config_hash"); it != table.meta.end())
      h.config_hash = std::stoull(it->second, nullptr, 16);
    if (auto it = table.meta.find("seed"); it != table.meta.end()) h.seed = std::stoull(it->second);
    write_file(out_prefix.string() + "_collisions.csv",
               [&](std::ostream& o) { write_collision_csv(o, intervals, s, h); });
    h.kind = "durations";
    write_file(out_prefix.string() + "_durations.csv",
               [&](std::ostream& o) { write_duration_csv(o, durations, h); });
    log << intervals.size() << " collision intervals, " << durations.flagged
        << " below the duration floor\n";
    return exit_ok;
  } catch (const FormatError& e) {
    log << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int cmd_batch(const fs::path& manifest_path, const fs::path& out_root, std::ostream& log) {
  ExperimentManifest manifest;
  try {
    manifest = load_manifest(manifest_path);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  }

  std::vector<BatchRow> rows(manifest.runs.size());
  std::vector<std::string> logs(manifest.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.runs.size(); i = next++) {
      const auto& entry = manifest.runs[i];
      BatchRow& row = rows[i];
      row.label = entry.label;
      std::ostringstream run_log;
      try {
        RunConfig cfg = load_run_config(entry.config);
        cfg.label = entry.label;
        const fs::path dir = out_root / entry.label;
        const SimulateOutcome sim = simulate(cfg, dir, run_log);
        if (sim.status != exit_ok) throw Error("simulate failed");
        const auto& v = sim.result->verdict;
        row.verdict = to_string(v.kind);
        row.t_plus = v.kind == VerdictKind::blowup_detected
                         ? v.t_plus
                         : std::numeric_limits<double>::quiet_NaN();
        row.final_energy = sim.result->series.records.back().energy;
        row.k_level = nearest_level(row.final_energy);
        if (sim.snapshot_count >= 3) {
          const AnalysisOutcome an = analyze(dir, {}, run_log);
          if (an.status != exit_ok) throw Error("analyze failed");
          const auto& recs = an.series.front().records;
          for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
            if (std::isfinite(it->energy)) {
              row.k_level = nearest_level(it->energy);
              break;
            }
          }
        }
      } catch (const std::exception& e) {
        row.error = e.what();
        std::string msg = run_log.str();
        if (!msg.empty()) {
          if (msg.back() == '\n') msg.pop_back();
          std::replace(msg.begin(), msg.end(), '\n', ' ');
          row.error += ": " + msg;
        }
        run_log << "error: " << e.what() << "\n";
      }
      logs[i] = run_log.str();
    }
  };
  const std::size_t width = std::min(manifest.width, manifest.runs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < rows.size(); ++i) log << "[" << rows[i].label << "] " << logs[i];

  std::size_t failed = 0;
  try {
    fs::create_directories(out_root);
    std::ifstream in(manifest_path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    write_file(out_root / run_files::summary, [&](std::ostream& o) {
      o << "# hmhf summary\n# version: " << HMHF_VERSION
        << "\n# config_hash: " << hash_hex(fnv1a_64(text.str())) << "\n# seed: 0\n"
        << "label,verdict,T_plus,final_E,K_level,error\n";
      for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        o << r.label << "," << (r.error.empty() ? r.verdict : "failed") << ","
          << format_double(r.error.empty() ? r.t_plus : std::numeric_limits<double>::quiet_NaN())
          << "," << format_double(r.error.empty() ? r.final_energy
                                                  : std::numeric_limits<double>::quiet_NaN())
          << "," << (r.error.empty() ? r.k_level : -1) << "," << err << "\n";
      }
    });
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_io;
  }
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  log << rows.size() - failed << " of " << rows.size() << " runs succeeded\n";
  return failed == rows.size() ? exit_failure : exit_ok;
}

int cmd_make_report(const fs::path& run_dir, const fs::path& out_dir, std::ostream& log) {
  try {
    const json verdict = read_json(run_dir / run_files::verdict);
    fs::create_directories(out_dir);
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(run_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
    std::sort(csvs.begin(), csvs.end());
    json report;
    report["version"] = HMHF_VERSION;
    report["config_hash"] = verdict.value("config_hash", "");
    report["seed"] = verdict.value("seed", 0);
    report["verdict"] = verdict;
    json files = json::array();
    auto add = [&](const fs::path& src, const std::string& name) {
      const CsvTable t = read_csv_file(src);
      fs::copy_file(src, out_dir / name, fs::copy_options::overwrite_existing);
      json f;
      f["file"] = name;
      f["kind"] = t.meta.count("kind") ? t.meta.at("kind") : "";
      f["columns"] = t.columns;
      f["rows"] = t.rows.size();
      if (t.meta.count("mode")) f["mode"] = t.meta.at("mode");
      files.push_back(f);
    };
    for (const auto& p : csvs) add(p, p.filename().string());
    if (fs::exists(run_dir / run_files::snapshot_index))
      add(run_dir / run_files::snapshot_index, "snapshot_index.csv");
    report["files"] = files;
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    log << "report with " << files.size() << " files -> " << out_dir.string() << "\n";
    return exit_ok;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_io;
  }
}

}  // namespace hmhf
