#include "infoplan/config.hpp"

#include <fstream>
#include <initializer_list>
#include <numeric>
#include <string>

namespace infoplan {

namespace {

/// JSON cursor that carries its path so every validation message names the
/// offending field.
class Node {
 public:
  Node(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(path_ + ": " + what);
  }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) fail("missing required key '" + key + "'");
    return Node(*it, path_ + "." + key);
  }

  std::optional<Node> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  void allow_keys(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      bool known = false;
      for (const char* k : keys) {
        if (it.key() == k) {
          known = true;
          break;
        }
      }
      if (!known) fail("unknown key '" + it.key() + "'");
    }
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  double nonnegative() const {
    const double v = number();
    if (v < 0.0) fail("must be nonnegative");
    return v;
  }

  int integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<int>();
  }

  int positive_int() const {
    const int v = integer();
    if (v < 1) fail("must be at least 1");
    return v;
  }

  std::int64_t integer64() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<std::int64_t>();
  }

  std::uint64_t seed_value() const {
    if (!j_->is_number_integer()) fail("expected an integer seed");
    return j_->get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected a boolean");
    return j_->get<bool>();
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  std::size_t array_size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node item(std::size_t i) const {
    return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::vector<double> numbers() const {
    const std::size_t n = array_size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = item(i).number();
    return out;
  }

  Vector vec() const {
    const std::vector<double> v = numbers();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Matrix matrix() const {
    const std::size_t rows = array_size();
    if (rows == 0) fail("matrix needs at least one row");
    const std::vector<double> first = item(0).numbers();
    if (first.empty()) fail("matrix rows must be nonempty");
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(first.size()));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::vector<double> row = item(r).numbers();
      if (row.size() != first.size()) item(r).fail("rows must share one length");
      for (std::size_t c = 0; c < row.size(); ++c) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
    return out;
  }

  Eigen::Vector2d point2() const {
    const std::vector<double> v = numbers();
    if (v.size() != 2) fail("expected a 2-vector [x, y]");
    return {v[0], v[1]};
  }

  bool is_object() const { return j_->is_object(); }
  const std::string& path() const { return path_; }

 private:
  const nlohmann::json* j_;
  std::string path_;
};

void check_window_times(const Node& where, double t_i, double t_f, double tau) {
  if (t_i < 0.0) where.fail("verification window must start at a nonnegative time");
  if (!(t_f > t_i)) where.fail("verification window must have positive length");
  if (!(tau > 0.0)) where.fail("measurement horizon must be positive");
  if (tau > t_i + 1e-12) {
    where.fail("measurement horizon must end at or before the verification window starts");
  }
}

void parse_lorenz(const Node& n, LorenzParams& p) {
  n.allow_keys({"l_i", "l_j", "mu", "phi0"});
  if (const auto k = n.maybe("l_i")) p.l_i = k->positive_int();
  if (const auto k = n.maybe("l_j")) p.l_j = k->positive_int();
  if (const auto k = n.maybe("mu")) p.mu = k->number();
  if (const auto k = n.maybe("phi0")) p.phi0 = k->number();
}

void parse_singer(const Node& n, RunConfig& c) {
  n.allow_keys({"name", "verify", "n_targets", "n_sensors", "active_size", "kappa", "alpha",
                "beta", "sigma_w", "sigma_n", "t_i", "t_f", "tau", "m_tau", "box",
                "p0_scales", "seed"});
  SingerConfig& s = c.singer;
  if (const auto k = n.maybe("n_targets")) s.n_targets = k->positive_int();
  if (const auto k = n.maybe("n_sensors")) s.n_sensors = k->positive_int();
  if (const auto k = n.maybe("active_size")) s.active_size = k->positive_int();
  if (const auto k = n.maybe("kappa")) s.kappa = k->positive();
  if (const auto k = n.maybe("alpha")) s.alpha = k->positive();
  if (const auto k = n.maybe("beta")) s.beta = k->positive();
  if (const auto k = n.maybe("sigma_w")) s.sigma_w = k->positive();
  if (const auto k = n.maybe("sigma_n")) s.sigma_n = k->positive();
  if (const auto k = n.maybe("t_i")) s.t_i = k->nonnegative();
  if (const auto k = n.maybe("t_f")) s.t_f = k->positive();
  if (const auto k = n.maybe("tau")) s.tau = k->positive();
  if (const auto k = n.maybe("m_tau")) s.m_tau = k->positive_int();
  if (const auto k = n.maybe("seed")) s.seed = k->seed_value();
  if (const auto k = n.maybe("box")) {
    const std::vector<double> b = k->numbers();
    if (b.size() != 4) k->fail("expected [x_min, x_max, y_min, y_max]");
    if (!(b[1] > b[0]) || !(b[3] > b[2])) k->fail("box must have positive extent");
    s.box = {b[0], b[1], b[2], b[3]};
  }
  if (const auto k = n.maybe("p0_scales")) {
    const std::vector<double> p = k->numbers();
    if (p.size() != 3) k->fail("expected [position, velocity, acceleration] scales");
    for (const double v : p) {
      if (!(v > 0.0)) k->fail("scales must be positive");
    }
    s.p0_scales = {p[0], p[1], p[2]};
  }
  if (const auto k = n.maybe("verify")) {
    const std::string v = k->str();
    if (v == "position") {
      c.singer_verify = SingerScenario::Verify::Position;
    } else if (v == "velocity") {
      c.singer_verify = SingerScenario::Verify::Velocity;
    } else if (v == "acceleration") {
      c.singer_verify = SingerScenario::Verify::Acceleration;
    } else {
      k->fail("expected position, velocity, or acceleration");
    }
  }
  if (s.active_size > s.n_sensors) n.fail("active_size cannot exceed n_sensors");
  check_window_times(n, s.t_i, s.t_f, s.tau);
}

void parse_weather(const Node& n, RunConfig& c) {
  n.allow_keys({"name", "readout", "seed", "spin_steps", "spin_step", "window_i", "window_j",
                "window_wi", "window_wj", "l_x", "l_y", "sigma_w", "sigma_n", "p0_scale",
                "hours_per_unit", "t_i_hours", "t_f_hours", "tau_hours",
                "speed_grid_per_hour", "platform_start", "verify_start", "verify_end",
                "lorenz"});
  WeatherConfig& w = c.weather;
  if (const auto k = n.maybe("seed")) w.seed = k->seed_value();
  if (const auto k = n.maybe("spin_steps")) w.spin_steps = k->positive_int();
  if (const auto k = n.maybe("spin_step")) w.spin_step = k->positive();
  if (const auto k = n.maybe("window_i")) w.window_i = k->integer();
  if (const auto k = n.maybe("window_j")) w.window_j = k->integer();
  if (const auto k = n.maybe("window_wi")) w.window_wi = k->positive_int();
  if (const auto k = n.maybe("window_wj")) w.window_wj = k->positive_int();
  if (const auto k = n.maybe("l_x")) w.l_x = k->positive();
  if (const auto k = n.maybe("l_y")) w.l_y = k->positive();
  if (const auto k = n.maybe("sigma_w")) w.sigma_w = k->positive();
  if (const auto k = n.maybe("sigma_n")) w.sigma_n = k->positive();
  if (const auto k = n.maybe("p0_scale")) w.p0_scale = k->positive();
  if (const auto k = n.maybe("hours_per_unit")) w.hours_per_unit = k->positive();
  if (const auto k = n.maybe("t_i_hours")) w.t_i_hours = k->nonnegative();
  if (const auto k = n.maybe("t_f_hours")) w.t_f_hours = k->positive();
  if (const auto k = n.maybe("tau_hours")) w.tau_hours = k->positive();
  if (const auto k = n.maybe("speed_grid_per_hour")) w.speed_grid_per_hour = k->nonnegative();
  if (const auto k = n.maybe("platform_start")) w.platform_start = k->point2();
  if (const auto k = n.maybe("verify_start")) {
    if (k->array_size() != 2) k->fail("expected two [x, y] readout positions");
    w.verify_start = {k->item(0).point2(), k->item(1).point2()};
  }
  if (const auto k = n.maybe("verify_end")) {
    if (k->array_size() != 2) k->fail("expected two [x, y] readout positions");
    w.verify_end = {k->item(0).point2(), k->item(1).point2()};
  }
  if (const auto k = n.maybe("lorenz")) parse_lorenz(*k, w.lorenz);
  if (const auto k = n.maybe("readout")) {
    const std::string v = k->str();
    if (v == "window") {
      c.weather_midpoint_readout = false;
    } else if (v == "midpoint") {
      c.weather_midpoint_readout = true;
    } else {
      k->fail("expected window or midpoint");
    }
  }
  check_window_times(n, w.t_i_hours, w.t_f_hours, w.tau_hours);
  if (w.window_i < 0 || w.window_j < 0 || w.window_i + w.window_wi > w.lorenz.l_i ||
      w.window_j + w.window_wj > w.lorenz.l_j) {
    n.fail("local window does not fit inside the model grid");
  }
}

MatrixPoly parse_matrix_poly(const Node& n) {
  if (n.is_object()) {
    n.allow_keys({"poly"});
    const Node p = n.at("poly");
    const std::size_t count = p.array_size();
    if (count == 0) p.fail("polynomial needs at least one coefficient matrix");
    std::vector<Matrix> coeffs(count);
    for (std::size_t i = 0; i < count; ++i) coeffs[i] = p.item(i).matrix();
    return MatrixPoly(std::move(coeffs));
  }
  return MatrixPoly::constant(n.matrix());
}

void parse_literal(const Node& n, RunConfig& c) {
  n.allow_keys({"name", "a", "b", "sigma_w", "mu0", "p0", "sensing", "spec", "tau"});
  LiteralScenario lit;
  lit.system.A = parse_matrix_poly(n.at("a"));
  lit.system.B = parse_matrix_poly(n.at("b"));
  lit.system.sigma_w = n.at("sigma_w").matrix();
  lit.system.P0 = n.at("p0").matrix();
  if (const auto k = n.maybe("mu0")) {
    lit.system.mu0 = k->vec();
  } else {
    lit.system.mu0 = Vector::Zero(lit.system.A.rows());
  }
  try {
    lit.system.validate();
  } catch (const Error& e) {
    n.fail(e.what());
  }

  const Node sens = n.at("sensing");
  sens.allow_keys({"c", "sigma_n"});
  const Matrix C = sens.at("c").matrix();
  if (C.cols() != lit.system.n_x()) sens.at("c").fail("column count must equal n_x");
  lit.sensing.n_z = C.rows();
  lit.sensing.sigma_n = sens.at("sigma_n").matrix();
  lit.sensing.C = [C](double) { return C; };
  try {
    lit.sensing.validate(lit.system.n_x());
  } catch (const Error& e) {
    sens.fail(e.what());
  }

  const Node sp = n.at("spec");
  sp.allow_keys({"kind", "t", "t_i", "t_f", "mv", "mv_end"});
  const std::string kind = sp.at("kind").str();
  Matrix mv;
  if (const auto k = sp.maybe("mv")) {
    mv = k->matrix();
  } else {
    mv = Matrix::Identity(lit.system.n_x(), lit.system.n_x());
  }
  if (mv.cols() != lit.system.n_x()) sp.fail("mv column count must equal n_x");
  lit.tau = n.at("tau").positive();
  if (kind == "point") {
    const double t = sp.at("t").positive();
    if (lit.tau > t + 1e-12) {
      n.at("tau").fail("measurement horizon must end at or before the readout time");
    }
    lit.spec = VerificationSpec::point(MatrixPoly::constant(mv), t);
  } else if (kind == "window") {
    const double t_i = sp.at("t_i").nonnegative();
    const double t_f = sp.at("t_f").number();
    check_window_times(sp, t_i, t_f, lit.tau);
    MatrixPoly poly = MatrixPoly::constant(mv);
    if (const auto k = sp.maybe("mv_end")) {
      const Matrix mv_end = k->matrix();
      if (mv_end.rows() != mv.rows() || mv_end.cols() != mv.cols()) {
        k->fail("mv_end must match mv's shape");
      }
      poly = MatrixPoly::blend(mv, mv_end, t_i, t_f);
    }
    lit.spec = VerificationSpec::window(std::move(poly), t_i, t_f);
  } else {
    sp.at("kind").fail("expected point or window");
  }
  c.literal = std::move(lit);
}

void parse_solver(const Node& n, SolverOptions& s) {
  n.allow_keys({"step", "chain_k_max"});
  if (const auto k = n.maybe("step")) s.step = k->positive();
  if (const auto k = n.maybe("chain_k_max")) s.chain_k_max = k->positive_int();
}

void parse_plan(const Node& n, PlanSettings& p) {
  n.allow_keys({"search", "candidate_budget", "segments", "multistart",
                "eval_budget_per_start", "initial_heading", "compare_strategies"});
  if (const auto k = n.maybe("search")) {
    const std::string v = k->str();
    if (v == "exhaustive") {
      p.search = ScheduleSearch::Exhaustive;
    } else if (v == "greedy") {
      p.search = ScheduleSearch::Greedy;
    } else if (v == "cross-exhaustive") {
      p.search = ScheduleSearch::CrossExhaustive;
    } else {
      k->fail("expected exhaustive, greedy, or cross-exhaustive");
    }
  }
  if (const auto k = n.maybe("candidate_budget")) {
    p.candidate_budget = k->integer64();
    if (p.candidate_budget < 1) k->fail("must be at least 1");
  }
  if (const auto k = n.maybe("segments")) p.segments = k->positive_int();
  if (const auto k = n.maybe("multistart")) p.multistart = k->positive_int();
  if (const auto k = n.maybe("eval_budget_per_start")) {
    p.eval_budget_per_start = k->positive_int();
  }
  if (const auto k = n.maybe("initial_heading")) p.initial_heading = k->number();
  if (const auto k = n.maybe("compare_strategies")) p.compare_strategies = k->boolean();
}

void parse_axis(const Node& n, AxisSettings& a) {
  n.allow_keys({"min", "max", "count"});
  a.min = n.at("min").number();
  a.max = n.at("max").number();
  a.count = n.at("count").positive_int();
  if (a.count > 1 && !(a.max > a.min)) n.fail("axis needs max > min for count > 1");
}

void parse_field(const Node& n, FieldSettings& f) {
  n.allow_keys({"times", "x", "y"});
  if (const auto k = n.maybe("times")) {
    f.times = k->numbers();
    if (f.times.empty()) k->fail("needs at least one time");
    for (const double t : f.times) {
      if (t < 0.0) k->fail("times must be nonnegative");
    }
  }
  if (const auto k = n.maybe("x")) parse_axis(*k, f.x);
  if (const auto k = n.maybe("y")) parse_axis(*k, f.y);
}

void parse_oracle(const Node& n, OracleSettings& o) {
  n.allow_keys({"dt_sweep", "verification_samples", "tolerance", "max_rows"});
  if (const auto k = n.maybe("dt_sweep")) {
    o.dt_sweep = k->numbers();
    if (o.dt_sweep.empty()) k->fail("needs at least one step");
    for (const double dt : o.dt_sweep) {
      if (!(dt > 0.0)) k->fail("steps must be positive");
    }
  }
  if (const auto k = n.maybe("verification_samples")) o.verification_samples = k->positive_int();
  if (const auto k = n.maybe("tolerance")) o.tolerance = k->positive();
  if (const auto k = n.maybe("max_rows")) o.max_rows = k->positive_int();
}

}  // namespace

RunConfig parse_config(const nlohmann::json& root) {
  RunConfig c;
  const Node top(root, "config");
  top.allow_keys({"scenario", "solver", "plan", "field", "oracle", "seed"});

  std::optional<std::uint64_t> top_seed;
  if (const auto k = top.maybe("seed")) top_seed = k->seed_value();
  if (top_seed) {
    c.singer.seed = *top_seed;
    c.weather.seed = *top_seed;
  }

  if (const auto sc = top.maybe("scenario")) {
    const std::string name = sc->maybe("name") ? sc->at("name").str() : "singer";
    if (name == "singer") {
      c.scenario = ScenarioKind::Singer;
      parse_singer(*sc, c);
    } else if (name == "weather") {
      c.scenario = ScenarioKind::Weather;
      parse_weather(*sc, c);
    } else if (name == "literal") {
      c.scenario = ScenarioKind::Literal;
      parse_literal(*sc, c);
    } else {
      sc->at("name").fail("expected singer, weather, or literal");
    }
  }

  if (const auto k = top.maybe("solver")) parse_solver(*k, c.solver);
  if (const auto k = top.maybe("plan")) parse_plan(*k, c.plan);
  if (const auto k = top.maybe("field")) parse_field(*k, c.field);
  if (const auto k = top.maybe("oracle")) parse_oracle(*k, c.oracle);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides) {
  if (overrides.seed) {
    config.singer.seed = *overrides.seed;
    config.weather.seed = *overrides.seed;
  }
  if (overrides.step) {
    if (!(*overrides.step > 0.0)) throw ConfigError("--step must be positive");
    config.solver.step = *overrides.step;
  }
}

ScenarioBundle build_scenario(const RunConfig& config) {
  ScenarioBundle b;
  switch (config.scenario) {
    case ScenarioKind::Singer: {
      b.singer = std::make_shared<SingerScenario>(config.singer);
      b.system = b.singer->system();
      b.spec = b.singer->verification(config.singer_verify);
      std::vector<int> active(static_cast<std::size_t>(config.singer.active_size));
      std::iota(active.begin(), active.end(), 0);
      b.sensing = b.singer->sensing_for(active);
      b.tau = config.singer.tau;
      break;
    }
    case ScenarioKind::Weather: {
      b.weather = std::make_shared<WeatherScenario>(config.weather);
      b.system = b.weather->system();
      b.spec = config.weather_midpoint_readout ? b.weather->midpoint_verification()
                                               : b.weather->verification();
      b.sensing = b.weather->sensing_at(config.weather.platform_start);
      b.tau = b.weather->tau();
      break;
    }
    case ScenarioKind::Literal: {
      const LiteralScenario& lit = config.literal.value();
      b.system = lit.system;
      b.sensing = lit.sensing;
      b.spec = lit.spec;
      b.tau = lit.tau;
      break;
    }
  }
  return b;
}

ScheduleProblem make_schedule_problem(const RunConfig& config, const ScenarioBundle& bundle) {
  if (!bundle.singer) {
    throw ConfigError("schedule planning needs the sensor-network scenario");
  }
  ScheduleProblem p;
  p.system = bundle.system;
  p.spec = bundle.verification();
  const std::shared_ptr<SingerScenario> sc = bundle.singer;
  p.sensing_for = [sc](const std::vector<int>& subset) { return sc->sensing_for(subset); };
  p.n_sensors = config.singer.n_sensors;
  p.subset_size = config.singer.active_size;
  p.n_intervals = config.singer.m_tau;
  p.tau = bundle.tau;
  p.options = config.solver;
  p.candidate_budget = config.plan.candidate_budget;
  p.sensor_locations = sc->sensors();
  return p;
}

TrajectoryProblem make_trajectory_problem(const RunConfig& config,
                                          const ScenarioBundle& bundle) {
  if (!bundle.weather) {
    throw ConfigError("trajectory planning needs the kernel-field scenario");
  }
  TrajectoryProblem p;
  p.system = bundle.system;
  p.spec = bundle.verification();
  p.field = &bundle.weather->field();
  p.sigma_n =
      config.weather.sigma_n * config.weather.sigma_n * Matrix::Identity(1, 1);
  p.start = config.weather.platform_start;
  p.speed = bundle.weather->speed();
  p.tau = bundle.tau;
  p.segments = config.plan.segments;
  p.multistart = config.plan.multistart;
  p.eval_budget_per_start = config.plan.eval_budget_per_start;
  p.options = config.solver;
  return p;
}

}  // namespace infoplan
