#include "infoplan/scenarios.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace infoplan {

Matrix seeded_spd(Eigen::Index n, std::uint64_t seed, const Vector& scales) {
  if (scales.size() != n) throw ConfigError("seeded_spd scale length mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = gauss(rng);
  }
  Matrix S = G * G.transpose() + 0.1 * static_cast<double>(n) * Matrix::Identity(n, n);
  Vector sd = S.diagonal().array().sqrt();
  Matrix P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      P(i, j) = scales(i) * scales(j) * S(i, j) / (sd(i) * sd(j));
    }
  }
  return symmetrized(P);
}

// ---------------------------------------------------------------------------
// Lorenz-2003

namespace {

struct LorenzView {
  const Matrix& f;
  const LorenzParams& p;

  double at(int i, int j) const {
    if (j < 0) return 3.0;
    if (j >= p.l_j) return 0.0;
    i %= p.l_i;
    if (i < 0) i += p.l_i;
    return f(i, j);
  }
  double zeta(int i, int j) const { return (at(i - 1, j) + at(i, j) + at(i + 1, j)) / 3.0; }
  double eta(int i, int j) const { return (at(i, j - 1) + at(i, j) + at(i, j + 1)) / 3.0; }
};

bool wrap_eq(int p, int x, int l_i) {
  int d = (p - x) % l_i;
  if (d < 0) d += l_i;
  return d == 0;
}

// d zeta(a, j) / d f(p, q); (p, q) interior.
double d_zeta(int a, int j, int p, int q, const LorenzParams& par) {
  if (q != j) return 0.0;
  double s = 0.0;
  for (int k = -1; k <= 1; ++k) {
    if (wrap_eq(p, a + k, par.l_i)) s += 1.0;
  }
  return s / 3.0;
}

// d eta(i, a) / d f(p, q); ghost latitudes are constants.
double d_eta(int i, int a, int p, int q, const LorenzParams& par) {
  if (!wrap_eq(p, i, par.l_i)) return 0.0;
  double s = 0.0;
  for (int k = -1; k <= 1; ++k) {
    if (q == a + k) s += 1.0;
  }
  return s / 3.0;
}

double d_at(int a, int b, int p, int q, const LorenzParams& par) {
  if (b < 0 || b >= par.l_j) return 0.0;
  return (q == b && wrap_eq(p, a, par.l_i)) ? 1.0 : 0.0;
}

double lorenz_tendency(const LorenzView& v, int i, int j) {
  const double mu = v.p.mu;
  double out = -v.at(i, j) - v.zeta(i - 4, j) * v.zeta(i - 2, j) -
               mu * v.eta(i, j - 4) * v.eta(i, j - 2) + v.p.phi0;
  for (int k = -1; k <= 1; ++k) {
    out += v.zeta(i - 2 + k, j) * v.at(i + 2 + k, j) / 3.0;
    out += mu * v.eta(i, j - 2 + k) * v.at(i, j + 2 + k) / 3.0;
  }
  return out;
}

double lorenz_jacobian_entry(const LorenzView& v, int i, int j, int p, int q) {
  const LorenzParams& par = v.p;
  const double mu = par.mu;
  double out = (p == i && q == j) ? -1.0 : 0.0;
  out -= d_zeta(i - 4, j, p, q, par) * v.zeta(i - 2, j) +
         v.zeta(i - 4, j) * d_zeta(i - 2, j, p, q, par);
  out -= mu * (d_eta(i, j - 4, p, q, par) * v.eta(i, j - 2) +
               v.eta(i, j - 4) * d_eta(i, j - 2, p, q, par));
  for (int k = -1; k <= 1; ++k) {
    out += (d_zeta(i - 2 + k, j, p, q, par) * v.at(i + 2 + k, j) +
            v.zeta(i - 2 + k, j) * d_at(i + 2 + k, j, p, q, par)) /
           3.0;
    out += mu *
           (d_eta(i, j - 2 + k, p, q, par) * v.at(i, j + 2 + k) +
            v.eta(i, j - 2 + k) * d_at(i, j + 2 + k, p, q, par)) /
           3.0;
  }
  return out;
}

}  // namespace

Matrix lorenz2003_rhs(const Matrix& field, const LorenzParams& params) {
  if (field.rows() != params.l_i || field.cols() != params.l_j) {
    throw ConfigError("field shape does not match the grid");
  }
  const LorenzView v{field, params};
  Matrix out(params.l_i, params.l_j);
  for (int i = 0; i < params.l_i; ++i) {
    for (int j = 0; j < params.l_j; ++j) out(i, j) = lorenz_tendency(v, i, j);
  }
  return out;
}

Matrix lorenz2003_jacobian_window(const Matrix& field, const LorenzParams& params, int i0,
                                  int j0, int wi, int wj) {
  if (i0 < 0 || j0 < 0 || wi < 1 || wj < 1 || i0 + wi > params.l_i || j0 + wj > params.l_j) {
    throw ConfigError("jacobian window does not fit inside the grid");
  }
  const LorenzView v{field, params};
  const int n = wi * wj;
  Matrix J(n, n);
  for (int y = 0; y < wj; ++y) {
    for (int x = 0; x < wi; ++x) {
      const int row = y * wi + x;
      for (int qy = 0; qy < wj; ++qy) {
        for (int qx = 0; qx < wi; ++qx) {
          J(row, qy * wi + qx) =
              lorenz_jacobian_entry(v, i0 + x, j0 + y, i0 + qx, j0 + qy);
        }
      }
    }
  }
  return J;
}

Matrix lorenz2003_spin_up(const LorenzParams& params, std::uint64_t seed, int steps,
                          double step) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix f(params.l_i, params.l_j);
  for (int i = 0; i < params.l_i; ++i) {
    for (int j = 0; j < params.l_j; ++j) f(i, j) = params.phi0 + gauss(rng);
  }
  const MatrixRhs rhs = [&params](double, const Matrix& x) {
    return lorenz2003_rhs(x, params);
  };
  for (int s = 0; s < steps; ++s) {
    f = rk4_step(rhs, 0.0, f, step);
    if (!f.allFinite()) throw DivergenceError("field spin-up diverged");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Kernel field

KernelField::KernelField(std::vector<Eigen::Vector2d> nodes, double l_x, double l_y)
    : nodes_(std::move(nodes)), l_x_(l_x), l_y_(l_y) {
  if (nodes_.empty()) throw ConfigError("kernel field needs at least one node");
  if (!(l_x > 0.0) || !(l_y > 0.0)) throw ConfigError("kernel length scales must be positive");
  const Eigen::Index n = size();
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector rho_i = rho(nodes_[static_cast<std::size_t>(i)]);
    gram.row(i) = rho_i.transpose();
  }
  gram = symmetrized(gram);
  gram_inv_ = spd_inverse(gram, "kernel Gram matrix");
}

Vector KernelField::rho(const Eigen::Vector2d& r) const {
  Vector out(size());
  for (Eigen::Index j = 0; j < size(); ++j) {
    const Eigen::Vector2d d = r - nodes_[static_cast<std::size_t>(j)];
    out(j) = std::exp(-d.x() * d.x() / (2.0 * l_x_ * l_x_) -
                      d.y() * d.y() / (2.0 * l_y_ * l_y_));
  }
  return out;
}

Matrix KernelField::row(const Eigen::Vector2d& r) const {
  return (gram_inv_ * rho(r)).transpose();
}

std::pair<Vector, Vector> KernelField::row_gradient(const Eigen::Vector2d& r) const {
  const Vector rho_r = rho(r);
  Vector dx(size()), dy(size());
  for (Eigen::Index j = 0; j < size(); ++j) {
    const Eigen::Vector2d d = r - nodes_[static_cast<std::size_t>(j)];
    dx(j) = -d.x() / (l_x_ * l_x_) * rho_r(j);
    dy(j) = -d.y() / (l_y_ * l_y_) * rho_r(j);
  }
  return {gram_inv_ * dx, gram_inv_ * dy};
}

// ---------------------------------------------------------------------------
// Singer tracking scenario

namespace {

Matrix singer_drift(const SingerConfig& c) {
  const int n = 6 * c.n_targets;
  Matrix A = Matrix::Zero(n, n);
  for (int t = 0; t < c.n_targets; ++t) {
    for (int axis = 0; axis < 2; ++axis) {
      const int o = 6 * t + 3 * axis;
      A(o, o + 1) = 1.0;
      A(o + 1, o + 2) = 1.0;
      A(o + 2, o + 2) = -c.kappa;
    }
  }
  return A;
}

Matrix singer_noise_routing(const SingerConfig& c) {
  const int n = 6 * c.n_targets;
  Matrix B = Matrix::Zero(n, 2 * c.n_targets);
  for (int t = 0; t < c.n_targets; ++t) {
    B(6 * t + 2, 2 * t) = 1.0;      // x-axis acceleration
    B(6 * t + 5, 2 * t + 1) = 1.0;  // y-axis acceleration
  }
  return B;
}

}  // namespace

SingerScenario::SingerScenario(SingerConfig config) : config_(config) {
  if (config_.n_targets < 1) throw ConfigError("scenario.n_targets: must be at least 1");
  if (config_.n_sensors < 1) throw ConfigError("scenario.n_sensors: must be at least 1");
  if (config_.active_size < 1 || config_.active_size > config_.n_sensors) {
    throw ConfigError("scenario.active_size: must lie in [1, n_sensors]");
  }
  if (!(config_.sigma_w > 0.0) || !(config_.sigma_n > 0.0)) {
    throw ConfigError("scenario noise levels must be positive");
  }

  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> ux(config_.box[0], config_.box[1]);
  std::uniform_real_distribution<double> uy(config_.box[2], config_.box[3]);
  sensors_.reserve(static_cast<std::size_t>(config_.n_sensors));
  for (int s = 0; s < config_.n_sensors; ++s) {
    sensors_.emplace_back(ux(rng), uy(rng));
  }
  targets_.reserve(static_cast<std::size_t>(config_.n_targets));
  for (int t = 0; t < config_.n_targets; ++t) {
    targets_.emplace_back(ux(rng), uy(rng));
  }

  const int n = 6 * config_.n_targets;
  Vector scales(n);
  for (int t = 0; t < config_.n_targets; ++t) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int c = 0; c < 3; ++c) {
        scales(6 * t + 3 * axis + c) = config_.p0_scales[static_cast<std::size_t>(c)];
      }
    }
  }

  system_.A = MatrixPoly::constant(singer_drift(config_));
  system_.B = MatrixPoly::constant(singer_noise_routing(config_));
  system_.sigma_w =
      config_.sigma_w * config_.sigma_w * Matrix::Identity(2 * config_.n_targets, 2 * config_.n_targets);
  system_.mu0 = Vector::Zero(n);
  system_.P0 = seeded_spd(n, config_.seed + 1, scales);
  system_.validate();
}

Matrix SingerScenario::selector(Verify kind) const {
  const int n = 6 * config_.n_targets;
  const int offset = kind == Verify::Position ? 0 : kind == Verify::Velocity ? 1 : 2;
  Matrix M = Matrix::Zero(2 * config_.n_targets, n);
  for (int t = 0; t < config_.n_targets; ++t) {
    M(2 * t, 6 * t + offset) = 1.0;
    M(2 * t + 1, 6 * t + 3 + offset) = 1.0;
  }
  return M;
}

VerificationSpec SingerScenario::verification(Verify kind) const {
  return VerificationSpec::window(MatrixPoly::constant(selector(kind)), config_.t_i,
                                  config_.t_f);
}

Matrix SingerScenario::pseudo_range_row(int sensor, int target) const {
  if (sensor < 0 || sensor >= config_.n_sensors) throw ConfigError("sensor index out of range");
  if (target < 0 || target >= config_.n_targets) throw ConfigError("target index out of range");
  const Eigen::Vector2d& l = sensors_[static_cast<std::size_t>(sensor)];
  const Eigen::Vector2d& r = targets_[static_cast<std::size_t>(target)];
  const double d2 = (r - l).squaredNorm();
  const double coef = -2.0 * config_.alpha / (d2 + config_.beta);
  Matrix row = Matrix::Zero(1, 6 * config_.n_targets);
  row(0, 6 * target) = coef * (l.x() - r.x());
  row(0, 6 * target + 3) = coef * (l.y() - r.y());
  return row;
}

SensingModel SingerScenario::sensing_for(const std::vector<int>& active) const {
  if (active.empty()) throw ConfigError("active sensor set must be nonempty");
  const auto n_rows = static_cast<Eigen::Index>(active.size()) * config_.n_targets;
  Matrix C(n_rows, 6 * config_.n_targets);
  Eigen::Index r = 0;
  for (const int s : active) {
    for (int t = 0; t < config_.n_targets; ++t) {
      C.row(r++) = pseudo_range_row(s, t);
    }
  }
  SensingModel m;
  m.n_z = n_rows;
  m.sigma_n = config_.sigma_n * config_.sigma_n * Matrix::Identity(n_rows, n_rows);
  m.C = [C](double) { return C; };
  return m;
}

// ---------------------------------------------------------------------------
// Weather scenario

namespace {

std::vector<Eigen::Vector2d> window_nodes(int wi, int wj) {
  std::vector<Eigen::Vector2d> nodes;
  nodes.reserve(static_cast<std::size_t>(wi) * static_cast<std::size_t>(wj));
  for (int y = 0; y < wj; ++y) {
    for (int x = 0; x < wi; ++x) {
      nodes.emplace_back(static_cast<double>(x), static_cast<double>(y));
    }
  }
  return nodes;
}

}  // namespace

WeatherScenario::WeatherScenario(WeatherConfig config)
    : config_(config),
      field_(window_nodes(config.window_wi, config.window_wj), config.l_x, config.l_y),
      base_field_(lorenz2003_spin_up(config.lorenz, config.seed, config.spin_steps,
                                     config.spin_step)) {
  if (!(config_.hours_per_unit > 0.0)) throw ConfigError("hours_per_unit must be positive");
  if (!(config_.sigma_w > 0.0) || !(config_.sigma_n > 0.0) || !(config_.p0_scale > 0.0)) {
    throw ConfigError("scenario noise and prior scales must be positive");
  }
  const Matrix A = lorenz2003_jacobian_window(base_field_, config_.lorenz, config_.window_i,
                                              config_.window_j, config_.window_wi,
                                              config_.window_wj);
  const Eigen::Index n = A.rows();
  system_.A = MatrixPoly::constant(A);
  system_.B = MatrixPoly::constant(Matrix::Identity(n, n));
  system_.sigma_w = config_.sigma_w * config_.sigma_w * Matrix::Identity(n, n);
  system_.mu0 = Vector::Zero(n);
  system_.P0 = seeded_spd(n, config_.seed + 1, Vector::Constant(n, config_.p0_scale));
  system_.validate();
}

double WeatherScenario::t_i() const { return config_.t_i_hours / config_.hours_per_unit; }
double WeatherScenario::t_f() const { return config_.t_f_hours / config_.hours_per_unit; }
double WeatherScenario::tau() const { return config_.tau_hours / config_.hours_per_unit; }
double WeatherScenario::speed() const {
  return config_.speed_grid_per_hour * config_.hours_per_unit;
}

VerificationSpec WeatherScenario::verification() const {
  Matrix m_i(2, field_.size()), m_f(2, field_.size());
  for (int k = 0; k < 2; ++k) {
    m_i.row(k) = field_.row(config_.verify_start[static_cast<std::size_t>(k)]);
    m_f.row(k) = field_.row(config_.verify_end[static_cast<std::size_t>(k)]);
  }
  return VerificationSpec::window(MatrixPoly::blend(m_i, m_f, t_i(), t_f()), t_i(), t_f());
}

VerificationSpec WeatherScenario::midpoint_verification() const {
  Matrix m(2, field_.size());
  for (int k = 0; k < 2; ++k) {
    const Matrix a = field_.row(config_.verify_start[static_cast<std::size_t>(k)]);
    const Matrix b = field_.row(config_.verify_end[static_cast<std::size_t>(k)]);
    m.row(k) = 0.5 * (a + b);
  }
  return VerificationSpec::point(MatrixPoly::constant(m), 0.5 * (t_i() + t_f()));
}

SensingModel WeatherScenario::sensing_along(std::function<Eigen::Vector2d(double)> path) const {
  if (!path) throw ConfigError("platform path is empty");
  SensingModel m;
  m.n_z = 1;
  m.sigma_n = config_.sigma_n * config_.sigma_n * Matrix::Identity(1, 1);
  const KernelField* field = &field_;
  m.C = [field, path = std::move(path)](double t) { return field->row(path(t)); };
  return m;
}

SensingModel WeatherScenario::sensing_at(const Eigen::Vector2d& fixed_position) const {
  const Matrix row = field_.row(fixed_position);
  SensingModel m;
  m.n_z = 1;
  m.sigma_n = config_.sigma_n * config_.sigma_n * Matrix::Identity(1, 1);
  m.C = [row](double) { return row; };
  return m;
}

}  // namespace infoplan
