#ifndef POPKOLMO_AGGREGATION_HPP
#define POPKOLMO_AGGREGATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "popkolmo/error.hpp"
#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/simulation.hpp"

namespace popkolmo {

/// Single-patch model with rates averaged under the stable patch
/// structure k: mu*(a) = sum_i k_i mu_i(a), beta*(a) = sum_i k_i beta_i(a).
struct AveragedModel {
  Vector k;
  AgeGrid grid;
  Vector averaged_mortality;
  Vector averaged_fertility;
  double fertility_cutoff = 0.0;

  VitalRates as_rates() const {
    return make_vital_rates(grid, {averaged_mortality}, {averaged_fertility},
                            fertility_cutoff);
  }
};

inline AveragedModel averaged_rates(const VitalRates& rates, const Vector& k) {
  if (k.size() != rates.patches()) {
    throw Error(ErrorCode::DimensionMismatch,
                "weight vector length != patch count");
  }
  for (double w : k) {
    if (!(w >= 0.0)) {
      throw Error(ErrorCode::InvalidInput, "weights must be non-negative");
    }
  }
  AveragedModel m;
  m.k = k;
  m.grid = rates.grid;
  m.fertility_cutoff = rates.fertility_cutoff;
  m.averaged_mortality.assign(rates.grid.nodes(), 0.0);
  m.averaged_fertility.assign(rates.grid.nodes(), 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < rates.grid.nodes(); ++j) {
      m.averaged_mortality[j] += k[i] * rates.mortality[i][j];
      m.averaged_fertility[j] += k[i] * rates.fertility[i][j];
    }
  }
  return m;
}

/// Runs the stepper with one patch and C = [0]; migration is inert.
inline Trajectory simulate_aggregated(const AveragedModel& model,
                                      const Vector& initial, double horizon,
                                      std::size_t output_stride = 1) {
  SimulationConfig cfg{
      .matrix = from_offdiagonal_rates(Matrix(1, 1, 0.0)),
      .rates = model.as_rates(),
      .epsilon = 1.0,
      .horizon = horizon,
      .initial = {initial},
      .output_stride = output_stride,
  };
  return simulate(cfg);
}

/// Sum over patches of the initial profile: the aggregated starting density.
inline Vector aggregate_profile(const std::vector<Vector>& per_patch) {
  if (per_patch.empty()) return {};
  Vector out(per_patch.front().size(), 0.0);
  for (const auto& row : per_patch)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  return out;
}

struct DeviationRow {
  double time = 0.0;
  /// ||patch_shares(full) - k||_inf
  double share = 0.0;
  /// max_i int |u_i - k_i u_bar| da / max(int u_bar da, floor)
  double profile = 0.0;
};

/// Sample-by-sample deviation of the full solution from k times the
/// aggregated solution. No interpolation: sample times must coincide.
inline std::vector<DeviationRow> compare(const Trajectory& full,
                                         const AveragedModel& model,
                                         const Trajectory& aggregated) {
  if (full.samples.size() != aggregated.samples.size()) {
    throw Error(ErrorCode::SampleMismatch, "trajectories have different lengths");
  }
  if (!(full.grid == aggregated.grid) || !(full.grid == model.grid)) {
    throw Error(ErrorCode::GridMismatch, "trajectory grids differ");
  }
  const std::size_t n = model.k.size();
  const double da = full.grid.step();
  const double initial_total =
      aggregated.samples.empty() ? 0.0 : aggregated.samples.front().total;
  const double floor = std::max(1e-12 * initial_total, 1e-300);

  std::vector<DeviationRow> rows;
  rows.reserve(full.samples.size());
  Vector diff(full.grid.nodes());
  for (std::size_t s = 0; s < full.samples.size(); ++s) {
    const Sample& f = full.samples[s];
    const Sample& g = aggregated.samples[s];
    if (f.step != g.step ||
        std::abs(f.time - g.time) > 1e-12 * std::max(1.0, std::abs(f.time))) {
      throw Error(ErrorCode::SampleMismatch, "sample times differ", s);
    }
    if (f.state.patches() != n) {
      throw Error(ErrorCode::DimensionMismatch, "k length != patch count");
    }
    DeviationRow row;
    row.time = f.time;
    for (std::size_t i = 0; i < n; ++i)
      row.share = std::max(row.share, std::abs(f.shares[i] - model.k[i]));
    const auto& ubar = g.state.values.front();
    const double denom = std::max(trapezoid(ubar, da), floor);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < diff.size(); ++j)
        diff[j] = std::abs(f.state.values[i][j] - model.k[i] * ubar[j]);
      row.profile = std::max(row.profile, trapezoid(diff, da) / denom);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace popkolmo

#endif  // POPKOLMO_AGGREGATION_HPP
