#ifndef POPKOLMO_IO_HPP
#define POPKOLMO_IO_HPP

// JSON and CSV encodings of matrices, reports, configs and trajectories.
// Patch indices are 1-based in every serialized form.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "popkolmo/aggregation.hpp"
#include "popkolmo/error.hpp"
#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/simulation.hpp"
#include "popkolmo/spectral.hpp"
#include "popkolmo/structure.hpp"

namespace popkolmo::io {

using json = nlohmann::json;

/// Fixed 17-significant-digit rendering used for every CSV float.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, what + " is not valid JSON: " + e.what());
  }
}

inline json load_json(const std::filesystem::path& path) {
  return parse_json_text(read_file(path), path.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace detail {

template <typename T>
T get_field(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::InvalidInput, ctx + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput,
                ctx + ": field \"" + key + "\" has the wrong type");
  }
}

inline Matrix square_from_flat(const json& obj, const char* key, std::size_t n) {
  const auto flat = get_field<std::vector<double>>(obj, key, "matrix");
  if (flat.size() != n * n) {
    throw Error(ErrorCode::NonSquare, std::string("\"") + key + "\" has " +
                                          std::to_string(flat.size()) +
                                          " values, expected n*n = " +
                                          std::to_string(n * n));
  }
  return Matrix::from_row_major(n, n, flat);
}

}  // namespace detail

/// {"n": int, "entries": [n*n row-major]} or
/// {"n": int, "offdiagonal_rates": [n*n row-major, diagonal ignored]}.
inline TransitionMatrix parse_matrix(const json& obj,
                                     double tolerance = kDefaultTolerance) {
  const auto n = detail::get_field<long long>(obj, "n", "matrix");
  if (n < 1) throw Error(ErrorCode::InvalidInput, "matrix: n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (obj.contains("entries")) {
    return validate_kolmogorov(detail::square_from_flat(obj, "entries", un),
                               tolerance);
  }
  if (obj.contains("offdiagonal_rates")) {
    return from_offdiagonal_rates(
        detail::square_from_flat(obj, "offdiagonal_rates", un));
  }
  throw Error(ErrorCode::InvalidInput,
              "matrix: needs \"entries\" or \"offdiagonal_rates\"");
}

inline json matrix_to_json(const Matrix& m) {
  json j;
  j["n"] = m.rows();
  j["entries"] = std::vector<double>(m.values().begin(), m.values().end());
  return j;
}

inline json indices_to_json(const std::vector<std::size_t>& idx) {
  json arr = json::array();
  for (std::size_t v : idx) arr.push_back(v + 1);
  return arr;
}

inline json to_json(const NormalForm& nf) {
  json j;
  j["permutation"] = indices_to_json(nf.permutation);
  j["m"] = nf.m;
  json blocks = json::array();
  for (const auto& b : nf.blocks) {
    blocks.push_back({{"kind", std::string(to_string(b.kind))},
                      {"original_indices", indices_to_json(b.original_indices)}});
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline json labels_to_json(const std::vector<BlockKind>& labels) {
  json arr = json::array();
  for (auto l : labels) arr.push_back(std::string(to_string(l)));
  return arr;
}

inline json complex_to_json(const Complex& c) {
  return {{"re", c.real()}, {"im", c.imag()}};
}

inline json to_json(const SpectralReport& r) {
  json j;
  json spec = json::array();
  for (const auto& l : r.spectrum) spec.push_back(complex_to_json(l));
  j["spectrum"] = std::move(spec);
  j["spectral_bound"] = r.spectral_bound;
  j["spectral_radius"] = r.spectral_radius;
  j["right_perron_basis"] = r.right_perron_basis;
  j["default_perron"] = r.default_perron;
  j["left_perron_residual"] = r.left_perron_residual;
  j["zero_multiplicity_geometric"] = r.zero_multiplicity_geometric;
  j["kernel_dimension_by_rank"] = r.kernel_dimension_by_rank;
  j["zero_eigenvalue_count"] = r.zero_eigenvalue_count;
  j["dominant_is_simple"] = r.dominant_is_simple;
  return j;
}

inline json to_json(const TheoremChecks& t) {
  return {{"zero_is_dominant", t.zero_is_dominant},
          {"left_one_residual_ok", t.left_one_residual_ok},
          {"zero_pattern_consistent", t.zero_pattern_consistent},
          {"transient_blocks_negative_bound", t.transient_blocks_negative_bound},
          {"kernel_dimension_matches_rank", t.kernel_dimension_matches_rank}};
}

/// Full analysis of a validated matrix.
inline json analysis_report(const TransitionMatrix& c) {
  const NormalForm nf = normal_form(c);
  const SpectralReport report = analyze(c, nf);
  json j;
  j["matrix"] = {{"n", c.n()},
                 {"tolerance", c.tolerance()},
                 {"column_sum_bound",
                  c.tolerance() * std::max(1.0, c.entries().max_abs())},
                 {"entries", std::vector<double>(c.entries().values().begin(),
                                                 c.entries().values().end())}};
  j["irreducible"] = is_irreducible(c);
  j["normal_form"] = to_json(nf);
  j["spectral"] = to_json(report);
  j["state_labels"] = labels_to_json(classify_states(nf));
  j["theorem_checks"] = to_json(check_theorems(c, nf, report));
  return j;
}

// ---- simulation config ----

inline Breakpoints parse_breakpoints(const json& arr, const std::string& ctx) {
  if (!arr.is_array() || arr.empty()) {
    throw Error(ErrorCode::InvalidInput, ctx + ": expected [[a, value], ...]");
  }
  Breakpoints pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::InvalidInput, ctx + ": breakpoint must be [a, value]");
    }
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

inline std::vector<Vector> parse_profiles(const json& obj, const char* key,
                                          std::size_t n, const AgeGrid& grid) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    throw Error(ErrorCode::InvalidInput,
                std::string("config: missing per-patch list \"") + key + "\"");
  }
  const json& lists = obj.at(key);
  if (lists.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string("config: \"") + key + "\" has " +
                    std::to_string(lists.size()) + " patches, matrix has " +
                    std::to_string(n));
  }
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(resample(
        parse_breakpoints(lists[i], std::string(key) + "[" + std::to_string(i + 1) + "]"),
        grid));
  }
  return out;
}

/// Parses a simulation config. "matrix" is either an inline matrix object or
/// a path, resolved relative to `base_dir`.
inline SimulationConfig parse_config(const json& obj,
                                     const std::filesystem::path& base_dir = {},
                                     double tolerance = kDefaultTolerance) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidInput, "config must be an object");
  if (!obj.contains("matrix")) {
    throw Error(ErrorCode::InvalidInput, "config: missing field \"matrix\"");
  }
  const json& mref = obj.at("matrix");
  TransitionMatrix c = mref.is_string()
                           ? parse_matrix(load_json(base_dir / mref.get<std::string>()),
                                          tolerance)
                           : parse_matrix(mref, tolerance);
  const AgeGrid grid =
      make_grid(detail::get_field<double>(obj, "age_max", "config"),
                detail::get_field<std::size_t>(obj, "grid_count", "config"));
  const std::size_t n = c.n();
  VitalRates rates = make_vital_rates(
      grid, parse_profiles(obj, "mortality", n, grid),
      parse_profiles(obj, "fertility", n, grid),
      detail::get_field<double>(obj, "fertility_cutoff", "config"));
  SimulationConfig cfg{
      .matrix = std::move(c),
      .rates = std::move(rates),
      .epsilon = detail::get_field<double>(obj, "epsilon", "config"),
      .horizon = detail::get_field<double>(obj, "horizon", "config"),
      .initial = parse_profiles(obj, "initial", n, grid),
      .output_stride = obj.contains("output_stride")
                           ? detail::get_field<std::size_t>(obj, "output_stride", "config")
                           : std::size_t{1},
  };
  validate_config(cfg);
  return cfg;
}

// ---- CSV ----

inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  const std::size_t n = t.samples.empty() ? 0 : t.samples.front().shares.size();
  out << "t,total";
  for (std::size_t i = 0; i < n; ++i) out << ",share_" << (i + 1);
  out << "\n";
  for (const auto& s : t.samples) {
    out << format_double(s.time) << ',' << format_double(s.total);
    for (double v : s.shares) out << ',' << format_double(v);
    out << "\n";
  }
}

inline void write_snapshot_csv(std::ostream& out, const PopulationState& s) {
  out << "age";
  for (std::size_t i = 0; i < s.patches(); ++i) out << ",u_" << (i + 1);
  out << "\n";
  for (std::size_t j = 0; j < s.grid.nodes(); ++j) {
    out << format_double(s.grid.age(j));
    for (std::size_t i = 0; i < s.patches(); ++i)
      out << ',' << format_double(s.values[i][j]);
    out << "\n";
  }
}

inline void write_deviation_csv(std::ostream& out,
                                const std::vector<DeviationRow>& rows) {
  out << "t,d_share,d_prof\n";
  for (const auto& r : rows) {
    out << format_double(r.time) << ',' << format_double(r.share) << ','
        << format_double(r.profile) << "\n";
  }
}

}  // namespace popkolmo::io

#endif  // POPKOLMO_IO_HPP
