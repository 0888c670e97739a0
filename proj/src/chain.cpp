#include "infoplan/chain.hpp"

#include <sstream>

namespace infoplan {

DerivativeChain::DerivativeChain(LinearGaussianSystem system, std::vector<MatrixPoly> h, int K)
    : system_(std::move(system)), h_(std::move(h)), K_(K) {
  if (K_ < 1 || h_.size() != static_cast<std::size_t>(K_) + 1) {
    throw ConfigError("derivative chain needs H_0..H_K with K >= 1");
  }
}

Matrix DerivativeChain::rbar(double t) const {
  const Matrix HB = h_at(K_ - 1, t) * system_.B(t);
  return HB * system_.sigma_w * HB.transpose();
}

Matrix DerivativeChain::abar(double t) const {
  const Matrix R = rbar(t);
  const auto llt = cholesky_spd(R, "Rbar");
  const Matrix G = system_.noise_gramian(t);
  return system_.A(t) - G * h_at(K_ - 1, t).transpose() * llt.solve(h_at(K_, t));
}

Matrix DerivativeChain::qbar(double t) const {
  const Matrix R = rbar(t);
  const auto llt = cholesky_spd(R, "Rbar");
  const Matrix HBS = h_at(K_ - 1, t) * system_.B(t) * system_.sigma_w;  // n_v by n_w
  return symmetrized(system_.sigma_w - HBS.transpose() * llt.solve(HBS));
}

Matrix DerivativeChain::gbar(double t) const {
  const Matrix R = rbar(t);
  const auto llt = cholesky_spd(R, "Rbar");
  const Matrix G = system_.noise_gramian(t);
  return G * h_at(K_ - 1, t).transpose() * llt.solve(Matrix::Identity(R.rows(), R.cols()));
}

Matrix DerivativeChain::hstack(double t) const {
  const Eigen::Index nv = n_v();
  Matrix H(static_cast<Eigen::Index>(K_) * nv, system_.n_x());
  for (int k = 0; k < K_; ++k) {
    H.middleRows(static_cast<Eigen::Index>(k) * nv, nv) = h_at(k, t);
  }
  return H;
}

Eigen::Index rank_of_noise_coupling(const Matrix& H_k, const Matrix& B,
                                    const Matrix& sigma_w) {
  const auto llt = cholesky_spd(sigma_w, "Sigma_W");
  const Matrix L = llt.matrixL();
  return numerical_rank(H_k * B * L);
}

DerivativeChain build_chain(const LinearGaussianSystem& system, const VerificationSpec& spec,
                            int k_max, const std::vector<double>& sample_times) {
  if (spec.kind() != VerificationSpec::Kind::Window) {
    throw ConfigError("derivative chains are built for window specs");
  }
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (sample_times.empty()) throw ConfigError("chain rank sampling needs at least one time");

  const Eigen::Index n_v = spec.n_v();
  std::vector<MatrixPoly> h;
  h.push_back(spec.mv());

  for (int j = 0; j < k_max; ++j) {
    // Rank of the noise coupling H_j B Sigma_W^{1/2} across the window.
    Eigen::Index rank_first = -1;
    for (const double t : sample_times) {
      const Eigen::Index r = rank_of_noise_coupling(h[static_cast<std::size_t>(j)](t),
                                                    system.B(t), system.sigma_w);
      if (rank_first < 0) {
        rank_first = r;
      } else if (r != rank_first) {
        std::ostringstream os;
        os << "noise coupling rank changes across the window at derivative order " << j + 1
           << " (saw " << rank_first << " and " << r << ")";
        throw AssumptionViolationError(os.str());
      }
    }
    if (rank_first == 0) {
      // Still noise-free; extend the chain one order.
      h.push_back(h.back().derivative() + h.back() * system.A);
      continue;
    }
    if (rank_first < n_v) {
      std::ostringstream os;
      os << "noise coupling at derivative order " << j + 1 << " has rank " << rank_first
         << " but the verification readout has " << n_v << " rows (n_w = " << system.n_w()
         << "); a decomposition of the verification variables would be required";
      throw AssumptionViolationError(os.str());
    }
    // Noise enters at order j+1 with full row rank; H_{K} closes the chain.
    const int K = j + 1;
    if (static_cast<int>(h.size()) != K) {
      throw NumericalConsistencyError("derivative chain bookkeeping error");
    }
    h.push_back(h.back().derivative() + h.back() * system.A);
    DerivativeChain chain(system, std::move(h), K);
    for (const double t : sample_times) {
      cholesky_spd(chain.rbar(t), "Rbar");  // must be PD across the window
    }
    return chain;
  }
  std::ostringstream os;
  os << "verification readout is still noise-free after " << k_max
     << " derivatives; raise k_max or check B and Sigma_W";
  throw AssumptionViolationError(os.str());
}

std::vector<double> default_chain_samples(const VerificationSpec& spec, int count) {
  std::vector<double> out;
  const double a = spec.t_start();
  const double b = spec.t_end();
  if (count < 2 || b == a) {
    out.push_back(a);
    if (b != a) out.push_back(b);
    return out;
  }
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace infoplan
