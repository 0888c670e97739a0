#include "infoplan/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace infoplan {
namespace oracle {

namespace {

// Log-det of a PSD covariance block with one jitter retry.
double block_ldet(const Matrix& S, const char* label) { return ldet(S, label); }

Matrix slice(const Matrix& S, const std::vector<Eigen::Index>& rows,
             const std::vector<Eigen::Index>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = S(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace

DiscreteJointModel build_discrete_model(const LinearGaussianSystem& system,
                                        std::vector<double> event_times, double exp_substep) {
  if (!(exp_substep > 0.0)) throw ConfigError("exponential substep must be positive");
  event_times.push_back(0.0);
  std::sort(event_times.begin(), event_times.end());
  if (event_times.front() < 0.0) throw ConfigError("event times must be nonnegative");
  std::vector<double> times;
  for (const double t : event_times) {
    if (times.empty() || t - times.back() > 1e-12) times.push_back(t);
  }

  const Eigen::Index n = system.n_x();
  const auto augmented = [&system, n](double t) -> Matrix {
    Matrix G = Matrix::Zero(2 * n, 2 * n);
    const Matrix At = system.A(t);
    G.topLeftCorner(n, n) = At;
    G.topRightCorner(n, n) = system.noise_gramian(t);
    G.bottomRightCorner(n, n) = -At.transpose();
    return G;
  };

  DiscreteJointModel model{system, times, {}, {}};
  model.phi.reserve(times.size() - 1);
  model.qd.reserve(times.size() - 1);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const Matrix psi =
        state_transition(augmented, 2 * n, times[k], times[k + 1], exp_substep);
    const Matrix phi = psi.topLeftCorner(n, n);
    const Matrix qd = symmetrized(psi.topRightCorner(n, n) * phi.transpose());
    model.phi.push_back(phi);
    model.qd.push_back(qd);
  }
  return model;
}

JointCovariance joint_covariance(const DiscreteJointModel& model,
                                 const std::vector<Query>& queries) {
  const Eigen::Index n = model.system.n_x();
  Eigen::Index total = 0;
  std::vector<Eigen::Index> offsets;
  offsets.reserve(queries.size());
  for (const auto& q : queries) {
    if (q.selector.cols() != n) throw ConfigError("query selector width must be n_x");
    offsets.push_back(total);
    total += q.rows();
  }
  for (std::size_t i = 1; i < queries.size(); ++i) {
    if (queries[i].t < queries[i - 1].t - 1e-12) {
      throw ConfigError("queries must be sorted by time");
    }
  }

  Matrix sigma = Matrix::Zero(total, total);
  Matrix P = model.system.P0;
  Matrix G(0, n);  // Cov(emitted stack, current state)
  Eigen::Index emitted = 0;
  std::size_t qi = 0;

  for (std::size_t e = 0; e < model.times.size(); ++e) {
    while (qi < queries.size() && std::abs(queries[qi].t - model.times[e]) <= 1e-9) {
      const Query& q = queries[qi];
      const Eigen::Index r = q.rows();
      const Matrix SP = q.selector * P;  // r by n
      if (emitted > 0) {
        const Matrix cross = q.selector * G.transpose();  // r by emitted
        sigma.block(emitted, 0, r, emitted) = cross;
        sigma.block(0, emitted, emitted, r) = cross.transpose();
      }
      Matrix diag = symmetrized(SP * q.selector.transpose());
      if (q.noise.size() > 0) {
        if (q.noise.rows() != r || q.noise.cols() != r) {
          throw ConfigError("query noise covariance shape mismatch");
        }
        diag += q.noise;
      }
      sigma.block(emitted, emitted, r, r) = diag;
      G.conservativeResize(emitted + r, n);
      G.bottomRows(r) = SP;
      emitted += r;
      ++qi;
    }
    if (e + 1 < model.times.size()) {
      P = symmetrized(model.phi[e] * P * model.phi[e].transpose() + model.qd[e]);
      if (emitted > 0) G = G * model.phi[e].transpose();
    }
  }
  if (qi != queries.size()) {
    throw ConfigError("a query time does not coincide with any model event");
  }
  return JointCovariance{std::move(sigma), std::move(offsets)};
}

std::vector<Query> verification_samples(const VerificationSpec& spec, int m_samples) {
  std::vector<Query> out;
  if (spec.kind() == VerificationSpec::Kind::Point) {
    out.push_back(Query{spec.t_start(), spec.mv_at(spec.t_start(), 0), Matrix()});
    return out;
  }
  if (m_samples < 1) throw ConfigError("need at least one verification sample");
  const double a = spec.t_start();
  const double b = spec.t_end();
  if (m_samples == 1 || b == a) {
    out.push_back(Query{a, spec.mv_at(a, 0), Matrix()});
    return out;
  }
  out.reserve(static_cast<std::size_t>(m_samples));
  for (int i = 0; i < m_samples; ++i) {
    const double t =
        a + (b - a) * static_cast<double>(i) / static_cast<double>(m_samples - 1);
    out.push_back(Query{t, spec.mv_at(t, 0), Matrix()});
  }
  return out;
}

double brute_mi(const LinearGaussianSystem& system, const SensingModel& sensing,
                const VerificationSpec& spec, double tau, const BruteMiOptions& options) {
  if (!(tau > 0.0)) throw ConfigError("measurement horizon must be positive");
  const double raw_steps = tau / options.dt;
  const auto n_meas = static_cast<std::size_t>(std::llround(raw_steps));
  if (n_meas == 0 || std::abs(static_cast<double>(n_meas) * options.dt - tau) > 1e-9 * tau) {
    throw ConfigError("measurement step must divide the horizon");
  }

  std::vector<Query> v_queries = verification_samples(spec, options.m_samples);
  const Matrix noise = sensing.sigma_n / options.dt;
  std::vector<Query> queries;
  queries.reserve(n_meas + v_queries.size());
  for (std::size_t k = 0; k < n_meas; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * options.dt;
    queries.push_back(Query{t, sensing.C(t), noise});
  }
  queries.insert(queries.end(), v_queries.begin(), v_queries.end());
  std::stable_sort(queries.begin(), queries.end(),
                   [](const Query& a, const Query& b) { return a.t < b.t; });

  std::vector<double> events;
  events.reserve(queries.size());
  for (const auto& q : queries) events.push_back(q.t);
  const DiscreteJointModel model =
      build_discrete_model(system, std::move(events), options.exp_substep);
  const JointCovariance joint = joint_covariance(model, queries);

  std::vector<Eigen::Index> v_rows, z_rows;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const bool is_meas = queries[i].noise.size() > 0;
    for (Eigen::Index r = 0; r < queries[i].rows(); ++r) {
      (is_meas ? z_rows : v_rows).push_back(joint.offsets[i] + r);
    }
  }

  const double ld_v = block_ldet(slice(joint.sigma, v_rows, v_rows), "verification block");
  const double ld_z = block_ldet(slice(joint.sigma, z_rows, z_rows), "measurement block");
  const double ld_joint = block_ldet(joint.sigma, "joint covariance");
  return 0.5 * (ld_v + ld_z - ld_joint);
}

Matrix schur_conditional(const LinearGaussianSystem& system, double target_t,
                         const Matrix& target_selector, const std::vector<Query>& given,
                         double exp_substep) {
  // Track the target block through the time sort by index (index 0 below).
  std::vector<Query> all;
  all.reserve(given.size() + 1);
  all.push_back(Query{target_t, target_selector, Matrix()});
  all.insert(all.end(), given.begin(), given.end());
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&all](std::size_t a, std::size_t b) { return all[a].t < all[b].t; });
  std::vector<Query> queries;
  queries.reserve(all.size());
  for (const std::size_t i : order) queries.push_back(all[i]);

  std::vector<double> events;
  for (const auto& q : queries) events.push_back(q.t);
  const DiscreteJointModel model =
      build_discrete_model(system, std::move(events), exp_substep);
  const JointCovariance joint = joint_covariance(model, queries);

  std::vector<Eigen::Index> t_rows, g_rows;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const bool is_target = order[pos] == 0;
    for (Eigen::Index r = 0; r < queries[pos].rows(); ++r) {
      (is_target ? t_rows : g_rows).push_back(joint.offsets[pos] + r);
    }
  }
  if (g_rows.empty()) {
    return symmetrized(slice(joint.sigma, t_rows, t_rows));
  }

  const Matrix S_tt = slice(joint.sigma, t_rows, t_rows);
  const Matrix S_tg = slice(joint.sigma, t_rows, g_rows);
  const Matrix S_gg = slice(joint.sigma, g_rows, g_rows);
  const auto llt = cholesky_spd(S_gg, "conditioning block");
  return symmetrized(S_tt - S_tg * llt.solve(S_tg.transpose()));
}

}  // namespace oracle
}  // namespace infoplan
