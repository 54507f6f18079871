// popkolmo: analyze Kolmogorov transition matrices and run the
// age-structured multi-patch model.
//
//   popkolmo analyze  <matrix.json> [--tol 1e-12] [--out report.json]
//   popkolmo simulate <config.json> --out-dir DIR
//   popkolmo compare  <config.json> --out-dir DIR [--epsilons 1e-1,1e-2,...]
//
// Exit codes: 0 ok, 1 I/O or numerical non-convergence, 2 invalid input,
// 3 runtime divergence. Diagnostics go to stderr as one-line JSON objects.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "popkolmo/io.hpp"
#include "popkolmo/popkolmo.hpp"

namespace fs = std::filesystem;
using namespace popkolmo;
using io::json;

namespace {

void report_error(const Error& e) {
  json j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.index()) {
    switch (e.code()) {
      case ErrorCode::ColumnSumNonZero:
      case ErrorCode::NegativeOffDiagonal:
        j["column"] = *e.index() + 1;
        break;
      case ErrorCode::NonFiniteState:
        j["step"] = *e.index();
        break;
      default:
        j["index"] = *e.index();
    }
  }
  std::cerr << j.dump() << std::endl;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string csv(const Trajectory& t) {
  std::ostringstream ss;
  io::write_trajectory_csv(ss, t);
  return ss.str();
}

json grid_json(const AgeGrid& g) {
  return {{"age_max", g.age_max}, {"grid_count", g.cells}, {"da", g.step()}};
}

json config_echo(const SimulationConfig& cfg) {
  return {{"matrix", io::matrix_to_json(cfg.matrix.entries())},
          {"epsilon", cfg.epsilon},
          {"horizon", cfg.horizon},
          {"output_stride", cfg.output_stride},
          {"grid", grid_json(cfg.rates.grid)},
          {"fertility_cutoff", cfg.rates.fertility_cutoff},
          {"mortality", cfg.rates.mortality},
          {"fertility", cfg.rates.fertility},
          {"initial", cfg.initial},
          {"steps", step_count(cfg.horizon, cfg.rates.grid)}};
}

SimulationConfig load_config(const fs::path& path) {
  return io::parse_config(io::load_json(path), path.parent_path());
}

int cmd_analyze(const fs::path& matrix_path, double tol,
                const std::optional<fs::path>& out) {
  const TransitionMatrix c = io::parse_matrix(io::load_json(matrix_path), tol);
  const std::string text = io::dump(io::analysis_report(c));
  if (out) {
    io::write_text(*out, text);
  } else {
    std::cout << text;
  }
  return 0;
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir) {
  const SimulationConfig cfg = load_config(config_path);
  const auto start = std::chrono::steady_clock::now();
  const Trajectory traj = simulate(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ensure_dir(out_dir / "snapshots");
  io::write_text(out_dir / "trajectory.csv", csv(traj));
  json samples = json::array();
  for (std::size_t s = 0; s < traj.samples.size(); ++s) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06zu.csv", s);
    std::ostringstream ss;
    io::write_snapshot_csv(ss, traj.samples[s].state);
    io::write_text(out_dir / "snapshots" / name, ss.str());
    samples.push_back({{"step", traj.samples[s].step},
                       {"t", traj.samples[s].time},
                       {"file", std::string("snapshots/") + name}});
  }
  json manifest{{"config", config_echo(cfg)},
                {"samples", samples},
                {"trajectory", "trajectory.csv"},
                {"timing", "timing.json"}};
  io::write_text(out_dir / "manifest.json", io::dump(manifest));
  // Wall time is kept out of the manifest so that it stays byte-identical
  // across runs.
  io::write_text(out_dir / "timing.json", io::dump(json{{"wall_time_seconds", wall}}));
  return 0;
}

struct CompareRun {
  double epsilon = 0.0;
  std::string report_csv;
  json summary;
};

CompareRun run_compare(SimulationConfig cfg) {
  const NormalForm nf = normal_form(cfg.matrix);
  const SpectralReport spectral = analyze(cfg.matrix, nf);
  const auto labels = classify_states(nf);

  const Trajectory full = simulate(cfg);
  const AveragedModel model = averaged_rates(cfg.rates, spectral.default_perron);
  const Trajectory agg = simulate_aggregated(model, aggregate_profile(cfg.initial),
                                             cfg.horizon, cfg.output_stride);
  const auto rows = compare(full, model, agg);

  CompareRun out;
  out.epsilon = cfg.epsilon;
  std::ostringstream ss;
  io::write_deviation_csv(ss, rows);
  out.report_csv = ss.str();

  const Sample& last = full.samples.back();
  double transient_share = 0.0;
  json transient_patches = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == BlockKind::Transient) {
      transient_share += last.shares[i];
      transient_patches.push_back(i + 1);
    }
  }
  out.summary = {{"epsilon", cfg.epsilon},
                 {"final_time", last.time},
                 {"final_d_share", rows.back().share},
                 {"final_d_prof", rows.back().profile},
                 {"final_shares", last.shares},
                 {"k", spectral.default_perron},
                 {"irreducible", nf.m == 1 && nf.transient_count() == 0},
                 {"state_labels", io::labels_to_json(labels)},
                 {"transient_patches", transient_patches},
                 {"transient_final_share", transient_share}};
  return out;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POPKOLMO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) cap = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, "POPKOLMO_THREADS must be a positive integer");
    }
  }
  return std::max<std::size_t>(1, std::min(cap, jobs));
}

std::vector<double> parse_epsilons(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v > 0.0)) {
      throw Error(ErrorCode::InvalidInput, "bad epsilon \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, "--epsilons is empty");
  return out;
}

int cmd_compare(const fs::path& config_path, const fs::path& out_dir,
                const std::optional<std::string>& epsilons) {
  const SimulationConfig base = load_config(config_path);
  ensure_dir(out_dir);
  if (!epsilons) {
    const CompareRun run = run_compare(base);
    io::write_text(out_dir / "error_report.csv", run.report_csv);
    io::write_text(out_dir / "summary.json", io::dump(run.summary));
    return 0;
  }

  const std::vector<double> eps = parse_epsilons(*epsilons);
  std::vector<std::optional<CompareRun>> results(eps.size());
  std::vector<std::optional<Error>> failures(eps.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(mu);
        if (next == eps.size()) return;
        job = next++;
      }
      SimulationConfig cfg = base;
      cfg.epsilon = eps[job];
      try {
        results[job] = run_compare(std::move(cfg));
      } catch (const Error& e) {
        failures[job] = e;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < worker_count(eps.size()); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) throw *f;

  json runs = json::array();
  bool non_increasing = true;
  for (std::size_t r = 0; r < results.size(); ++r) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "run_%02zu", r);
    ensure_dir(out_dir / dir);
    io::write_text(out_dir / dir / "error_report.csv", results[r]->report_csv);
    io::write_text(out_dir / dir / "summary.json", io::dump(results[r]->summary));
    json entry = results[r]->summary;
    entry["directory"] = dir;
    runs.push_back(std::move(entry));
    if (r > 0 && eps[r] < eps[r - 1] &&
        results[r]->summary["final_d_share"].get<double>() >
            results[r - 1]->summary["final_d_share"].get<double>()) {
      non_increasing = false;
    }
  }
  io::write_text(out_dir / "sweep_summary.json",
                 io::dump(json{{"runs", runs},
                               {"d_share_non_increasing_as_epsilon_decreases",
                                non_increasing}}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kolmogorov transition-matrix analysis and age-structured simulation"};
  app.require_subcommand(1);

  std::string matrix_path;
  double tol = kDefaultTolerance;
  std::string analyze_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Structure and spectral report for a matrix");
  analyze_cmd->add_option("matrix_path", matrix_path, "Matrix JSON file")->required();
  analyze_cmd->add_option("--tol", tol, "Validation tolerance (scale-relative)")
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--out", analyze_out, "Report path (default: stdout)");

  std::string sim_config, sim_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the age-structured model");
  simulate_cmd->add_option("config_path", sim_config, "Config JSON file")->required();
  simulate_cmd->add_option("--out-dir", sim_out, "Output directory")->required();

  std::string cmp_config, cmp_out, cmp_eps;
  auto* compare_cmd =
      app.add_subcommand("compare", "Compare the full model against its averaged model");
  compare_cmd->add_option("config_path", cmp_config, "Config JSON file")->required();
  compare_cmd->add_option("--out-dir", cmp_out, "Output directory")->required();
  compare_cmd->add_option("--epsilons", cmp_eps, "Comma-separated epsilon sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*analyze_cmd) {
      return cmd_analyze(matrix_path, tol,
                         analyze_out.empty() ? std::nullopt
                                             : std::optional<fs::path>(analyze_out));
    }
    if (*simulate_cmd) return cmd_simulate(sim_config, sim_out);
    if (*compare_cmd) {
      return cmd_compare(cmp_config, cmp_out,
                         compare_cmd->count("--epsilons") ? std::optional(cmp_eps)
                                                          : std::nullopt);
    }
  } catch (const Error& e) {
    report_error(e);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Io"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 1;
}
