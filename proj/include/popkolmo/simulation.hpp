#ifndef POPKOLMO_SIMULATION_HPP
#define POPKOLMO_SIMULATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "popkolmo/error.hpp"
#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/matrix.hpp"

namespace popkolmo {

/// Uniform age grid a_j = j * da, j = 0..cells, da = age_max / cells.
struct AgeGrid {
  double age_max = 1.0;
  std::size_t cells = 1;

  double step() const noexcept { return age_max / static_cast<double>(cells); }
  std::size_t nodes() const noexcept { return cells + 1; }
  double age(std::size_t j) const noexcept {
    return static_cast<double>(j) * step();
  }
  friend bool operator==(const AgeGrid&, const AgeGrid&) = default;
};

inline AgeGrid make_grid(double age_max, std::size_t cells) {
  if (!(age_max > 0.0) || !std::isfinite(age_max)) {
    throw Error(ErrorCode::InvalidInput, "age_max must be positive");
  }
  if (cells == 0) throw Error(ErrorCode::InvalidInput, "grid_count must be >= 1");
  return AgeGrid{age_max, cells};
}

/// Composite trapezoid rule on the grid nodes.
inline double trapezoid(std::span<const double> values, double da) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) s += values[j];
  return s * da;
}

/// (age, value) breakpoints.
using Breakpoints = std::vector<std::pair<double, double>>;

/// Piecewise-linear interpolation of breakpoints onto the grid nodes;
/// constant extrapolation outside the breakpoint range.
inline Vector resample(const Breakpoints& points, const AgeGrid& grid) {
  if (points.empty()) {
    throw Error(ErrorCode::InvalidInput, "empty breakpoint list");
  }
  Breakpoints pts = points;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Vector out(grid.nodes());
  for (std::size_t j = 0; j < grid.nodes(); ++j) {
    const double a = grid.age(j);
    if (a <= pts.front().first) {
      out[j] = pts.front().second;
    } else if (a >= pts.back().first) {
      out[j] = pts.back().second;
    } else {
      auto hi = std::upper_bound(pts.begin(), pts.end(), a,
                                 [](double x, const auto& p) { return x < p.first; });
      auto lo = hi - 1;
      const double w = (a - lo->first) / (hi->first - lo->first);
      out[j] = lo->second + w * (hi->second - lo->second);
    }
  }
  return out;
}

/// Per-patch, per-node mortality mu_i(a_j) and fertility beta_i(a_j).
/// Fertility is forced to zero at ages above the cutoff w.
struct VitalRates {
  AgeGrid grid;
  std::vector<Vector> mortality;
  std::vector<Vector> fertility;
  double fertility_cutoff = 0.0;

  std::size_t patches() const noexcept { return mortality.size(); }
};

inline VitalRates make_vital_rates(const AgeGrid& grid,
                                   std::vector<Vector> mortality,
                                   std::vector<Vector> fertility,
                                   double fertility_cutoff) {
  if (mortality.size() != fertility.size() || mortality.empty()) {
    throw Error(ErrorCode::DimensionMismatch,
                "mortality and fertility need the same (non-zero) patch count");
  }
  if (!(fertility_cutoff >= 0.0) || fertility_cutoff > grid.age_max) {
    throw Error(ErrorCode::InvalidInput,
                "fertility_cutoff must lie in [0, age_max]");
  }
  auto check = [&](const std::vector<Vector>& table, const char* name) {
    for (const auto& row : table) {
      if (row.size() != grid.nodes()) {
        throw Error(ErrorCode::GridMismatch,
                    std::string(name) + " table length != grid_count + 1");
      }
      for (double v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw Error(ErrorCode::InvalidInput,
                      std::string(name) + " must be finite and non-negative");
        }
      }
    }
  };
  check(mortality, "mortality");
  check(fertility, "fertility");
  for (auto& row : fertility)
    for (std::size_t j = 0; j < row.size(); ++j)
      if (grid.age(j) > fertility_cutoff) row[j] = 0.0;
  return VitalRates{grid, std::move(mortality), std::move(fertility),
                    fertility_cutoff};
}

/// Densities u_i(a_j, t): values[i][j] for patch i, age node j.
struct PopulationState {
  double time = 0.0;
  AgeGrid grid;
  std::vector<Vector> values;

  std::size_t patches() const noexcept { return values.size(); }
};

inline Vector patch_integrals(const PopulationState& s) {
  Vector out(s.patches());
  for (std::size_t i = 0; i < s.patches(); ++i)
    out[i] = trapezoid(s.values[i], s.grid.step());
  return out;
}

inline double total_population(const PopulationState& s) {
  double t = 0.0;
  for (double v : patch_integrals(s)) t += v;
  return t;
}

/// Share of the total population in each patch, k_i ~ u_i / u.
inline Vector patch_shares(const PopulationState& s) {
  Vector shares = patch_integrals(s);
  double total = 0.0;
  for (double v : shares) total += v;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::EmptyPopulation, "total population is not positive");
  }
  for (double& v : shares) v /= total;
  return shares;
}

/// Newborn density per patch: b_i = int_0^w beta_i(a) u_i(a) da (trapezoid).
/// Each patch's births come from its own fertility.
inline Vector renewal_boundary(const PopulationState& s, const VitalRates& r) {
  if (!(s.grid == r.grid) || s.patches() != r.patches()) {
    throw Error(ErrorCode::GridMismatch, "state and rates grids differ");
  }
  Vector births(s.patches());
  Vector integrand(s.grid.nodes());
  for (std::size_t i = 0; i < s.patches(); ++i) {
    for (std::size_t j = 0; j < integrand.size(); ++j)
      integrand[j] = r.fertility[i][j] * s.values[i][j];
    births[i] = trapezoid(integrand, s.grid.step());
  }
  return births;
}

/// exp((dt / epsilon) C) for the step size dt = da.
struct MigrationPropagator {
  Matrix entries;
  double dt = 0.0;
  double epsilon = 1.0;
};

inline MigrationPropagator make_migration_propagator(const TransitionMatrix& c,
                                                     const AgeGrid& grid,
                                                     double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
  }
  const double dt = grid.step();
  return MigrationPropagator{matrix_exponential(c, dt / epsilon).entries, dt,
                             epsilon};
}

/// One Lie-split step of length dt = da:
/// transport (exact shift by one cell; the oldest node leaves the domain),
/// mortality exp(-mu dt) at the new ages, migration by the propagator at each
/// age node, then the renewal condition at age 0.
inline PopulationState step(const PopulationState& s, const VitalRates& r,
                            const MigrationPropagator& p) {
  const std::size_t n = s.patches();
  if (!(s.grid == r.grid) || n != r.patches()) {
    throw Error(ErrorCode::GridMismatch, "state and rates grids differ");
  }
  if (p.entries.rows() != n || std::abs(p.dt - s.grid.step()) > 1e-12 * p.dt) {
    throw Error(ErrorCode::GridMismatch,
                "propagator does not match the patch count or step size");
  }
  const std::size_t nodes = s.grid.nodes();
  const double dt = s.grid.step();

  PopulationState next;
  next.grid = s.grid;
  next.values.assign(n, Vector(nodes, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j < nodes; ++j) {
      next.values[i][j] = s.values[i][j - 1] * std::exp(-r.mortality[i][j] * dt);
    }
  }
  Vector column(n);
  for (std::size_t j = 1; j < nodes; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = next.values[i][j];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += p.entries(i, k) * column[k];
      next.values[i][j] = acc;
    }
  }
  const Vector births = renewal_boundary(next, r);
  for (std::size_t i = 0; i < n; ++i) next.values[i][0] = births[i];
  next.time = s.time + dt;
  return next;
}

struct SimulationConfig {
  TransitionMatrix matrix;
  VitalRates rates;
  double epsilon = 1.0;
  double horizon = 0.0;
  /// initial[i][j] = phi_i(a_j).
  std::vector<Vector> initial;
  std::size_t output_stride = 1;
};

inline void validate_config(const SimulationConfig& c) {
  const std::size_t n = c.matrix.n();
  if (c.rates.patches() != n || c.initial.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix, rates and initial profile disagree on patch count");
  }
  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) {
    throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
  }
  if (!(c.horizon >= 0.0) || !std::isfinite(c.horizon)) {
    throw Error(ErrorCode::InvalidInput, "horizon must be non-negative");
  }
  if (c.output_stride == 0) {
    throw Error(ErrorCode::InvalidInput, "output_stride must be >= 1");
  }
  bool any_positive = false;
  for (const auto& row : c.initial) {
    if (row.size() != c.rates.grid.nodes()) {
      throw Error(ErrorCode::GridMismatch, "initial profile length mismatch");
    }
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidInput,
                    "initial profile must be finite and non-negative");
      }
      any_positive = any_positive || v > 0.0;
    }
  }
  if (!any_positive) {
    throw Error(ErrorCode::InvalidInput, "initial profile is identically zero");
  }
}

struct Sample {
  std::size_t step = 0;
  double time = 0.0;
  double total = 0.0;
  /// Zero vector once the population has died out.
  Vector shares;
  PopulationState state;
};

struct Trajectory {
  AgeGrid grid;
  std::vector<Sample> samples;
};

inline std::size_t step_count(double horizon, const AgeGrid& grid) {
  if (horizon <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(horizon / grid.step() - 1e-9));
}

inline Sample make_sample(std::size_t step_index, const PopulationState& s) {
  Sample out;
  out.step = step_index;
  out.time = s.time;
  out.total = total_population(s);
  out.shares = out.total > 0.0 ? patch_shares(s) : Vector(s.patches(), 0.0);
  out.state = s;
  return out;
}

/// Runs ceil(T / da) steps with dt = da, sampling the initial state, every
/// output_stride-th step, and the final step.
inline Trajectory simulate(const SimulationConfig& config) {
  validate_config(config);
  const AgeGrid& grid = config.rates.grid;
  const MigrationPropagator prop =
      make_migration_propagator(config.matrix, grid, config.epsilon);

  PopulationState state;
  state.grid = grid;
  state.values = config.initial;

  Trajectory out;
  out.grid = grid;
  out.samples.push_back(make_sample(0, state));
  const std::size_t steps = step_count(config.horizon, grid);
  for (std::size_t k = 1; k <= steps; ++k) {
    state = step(state, config.rates, prop);
    state.time = static_cast<double>(k) * grid.step();
    for (const auto& row : state.values) {
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::NonFiniteState,
                      "non-finite density at step " + std::to_string(k), k);
        }
      }
    }
    if (k % config.output_stride == 0 || k == steps) {
      out.samples.push_back(make_sample(k, state));
    }
  }
  return out;
}

}  // namespace popkolmo

#endif  // POPKOLMO_SIMULATION_HPP
