#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "infoplan/system.hpp"

namespace infoplan {

/// Seeded SPD matrix with prescribed per-coordinate standard deviations:
/// a random correlation factor is synthesized and rescaled so the diagonal
/// equals scales^2.
Matrix seeded_spd(Eigen::Index n, std::uint64_t seed, const Vector& scales);

// ---------------------------------------------------------------------------
// Two-dimensional Lorenz-2003 field model on a cylindrical grid: periodic
// east-west, constant walls north-south (3 below the first latitude, 0 above
// the last). The smoothed neighbor averages make each tendency a stencil of
// about nine longitudes by nine latitudes.

struct LorenzParams {
  int l_i = 72;       // longitudes (periodic)
  int l_j = 17;       // latitudes
  double mu = 0.66;   // meridional coupling
  double phi0 = 8.0;  // forcing
};

/// Tendency of the full field (l_i by l_j matrix, row = longitude).
Matrix lorenz2003_rhs(const Matrix& field, const LorenzParams& params);

/// Analytic Jacobian restricted to a rectangular window of the grid
/// (couplings leaving the window are dropped). Entry order is row-major in
/// the window with longitude fastest: index = y * wi + x.
Matrix lorenz2003_jacobian_window(const Matrix& field, const LorenzParams& params, int i0,
                                  int j0, int wi, int wj);

/// Fixed-seed RK4 spin-up from the forcing value plus noise; lands on the
/// model attractor for moderate step counts.
Matrix lorenz2003_spin_up(const LorenzParams& params, std::uint64_t seed, int steps = 500,
                          double step = 0.01);

// ---------------------------------------------------------------------------
// Radial-kernel interpolation field: a scalar measurement at position r reads
// the state through row(r) = rho(r)' Gram^{-1}, which is exact at the nodes.

class KernelField {
 public:
  KernelField(std::vector<Eigen::Vector2d> nodes, double l_x, double l_y);

  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes_.size()); }
  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }
  double l_x() const { return l_x_; }
  double l_y() const { return l_y_; }

  /// Kernel values rho(r, r_j).
  Vector rho(const Eigen::Vector2d& r) const;
  /// Interpolation row (1 by n).
  Matrix row(const Eigen::Vector2d& r) const;
  /// Spatial gradient of the row: columns d/dx and d/dy (n each).
  std::pair<Vector, Vector> row_gradient(const Eigen::Vector2d& r) const;

 private:
  std::vector<Eigen::Vector2d> nodes_;
  double l_x_;
  double l_y_;
  Matrix gram_inv_;
};

// ---------------------------------------------------------------------------
// Maneuvering-target tracking: per target and axis the state chain is
// position, velocity, exponentially correlated acceleration. Pseudo-range
// sensing rows are linearized at fixed nominal geometry.

struct SingerConfig {
  int n_targets = 1;
  int n_sensors = 20;
  int active_size = 5;
  double kappa = 0.4;
  double alpha = 2000.0;
  double beta = 100.0;
  double sigma_w = 0.07;  // acceleration noise std per axis
  double sigma_n = 0.25;  // measurement noise std per channel
  double t_i = 3.0;
  double t_f = 5.0;
  double tau = 2.5;  // measurement horizon; must not pass t_i
  int m_tau = 5;     // decision intervals over [0, tau]
  std::array<double, 4> box{0.0, 100.0, 0.0, 100.0};
  std::array<double, 3> p0_scales{5.0, 2.0, 0.1};  // pos, vel, acc std per axis
  std::uint64_t seed = 7;
};

class SingerScenario {
 public:
  enum class Verify { Position, Velocity, Acceleration };

  explicit SingerScenario(SingerConfig config = {});

  const SingerConfig& config() const { return config_; }
  const LinearGaussianSystem& system() const { return system_; }
  const std::vector<Eigen::Vector2d>& sensors() const { return sensors_; }
  const std::vector<Eigen::Vector2d>& nominal_targets() const { return targets_; }

  /// Row selector picking the chosen coordinate of every target and axis
  /// (2 n_targets rows).
  Matrix selector(Verify kind) const;
  VerificationSpec verification(Verify kind = Verify::Velocity) const;

  /// Stacked pseudo-range sensing for the active sensor subset (ascending
  /// indices), one row per sensor-target pair.
  SensingModel sensing_for(const std::vector<int>& active) const;
  /// Single linearized pseudo-range row for one sensor and target.
  Matrix pseudo_range_row(int sensor, int target) const;

 private:
  SingerConfig config_;
  LinearGaussianSystem system_;
  std::vector<Eigen::Vector2d> sensors_;
  std::vector<Eigen::Vector2d> targets_;
};

// ---------------------------------------------------------------------------
// Forecast-verification planning: linearized perturbation dynamics on a local
// window of the Lorenz-2003 grid, kernel-interpolated scalar sensing from a
// moving platform, verification readouts at two objects drifting one grid
// cell across the verification window. Config times are in hours; the model
// evolves in model units (one unit = hours_per_unit hours).

struct WeatherConfig {
  LorenzParams lorenz{};
  std::uint64_t seed = 3;
  int spin_steps = 500;
  double spin_step = 0.01;
  int window_i = 30;  // local window origin (longitude index)
  int window_j = 7;   // local window origin (latitude index)
  int window_wi = 4;
  int window_wj = 3;
  double l_x = 1.0;
  double l_y = 0.7;
  double sigma_w = 0.2;   // perturbation process noise std per grid point
  double sigma_n = 0.05;  // measurement noise std
  double p0_scale = 0.25;
  double hours_per_unit = 120.0;
  double t_i_hours = 60.0;
  double t_f_hours = 84.0;
  double tau_hours = 6.0;
  double speed_grid_per_hour = 1.0 / 3.0;
  Eigen::Vector2d platform_start{0.5, 0.5};
  std::array<Eigen::Vector2d, 2> verify_start{{{1.0, 1.0}, {2.5, 1.5}}};
  std::array<Eigen::Vector2d, 2> verify_end{{{2.0, 1.0}, {2.5, 0.5}}};
};

class WeatherScenario {
 public:
  explicit WeatherScenario(WeatherConfig config = {});

  const WeatherConfig& config() const { return config_; }
  const LinearGaussianSystem& system() const { return system_; }
  const KernelField& field() const { return field_; }
  const Matrix& spun_up_field() const { return base_field_; }

  double t_i() const;   // model units
  double t_f() const;
  double tau() const;
  double speed() const;  // grid units per model unit

  /// Sliding readout of the two verification objects (linear blend between
  /// the endpoint interpolation rows).
  VerificationSpec verification() const;
  /// Midpoint single-time readout with the averaged verification matrix.
  VerificationSpec midpoint_verification() const;

  /// Scalar kernel sensing along a platform path given in model time.
  SensingModel sensing_along(std::function<Eigen::Vector2d(double)> path) const;
  SensingModel sensing_at(const Eigen::Vector2d& fixed_position) const;

 private:
  WeatherConfig config_;
  KernelField field_;
  Matrix base_field_;
  LinearGaussianSystem system_;
};

}  // namespace infoplan
