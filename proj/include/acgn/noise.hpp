#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "acgn/linalg.hpp"

namespace acgn {

/// Vector ARMA(p, q) noise:
///   v_k = sum_{i=1..p} F_i v_{k-i} + vhat_k + sum_{j=1..q} G_j vhat_{k-j}
/// with vhat_k white Gaussian, covariance Vhat. The shaping filter
///   F(z) = (I - sum F_i z^-i)^{-1} (I + sum G_j z^-j)
/// must be stable and minimum-phase: every root of
/// det(I - sum F_i z^-i) and det(I + sum G_j z^-j) strictly inside the unit
/// circle. A root of modulus exactly 1 fails.
struct ArmaNoiseModel {
  std::vector<Mat> F;  // AR taps F_1..F_p, each n x n
  std::vector<Mat> G;  // MA taps G_1..G_q, each n x n
  Mat Vhat;            // innovation covariance, n x n SPD

  Eigen::Index n() const { return Vhat.rows(); }
  int p() const { return static_cast<int>(F.size()); }
  int q() const { return static_cast<int>(G.size()); }
};

struct NoiseValidation {
  bool vhat_spd = false;
  double vhat_min_eig = 0.0;
  bool ar_stable = false;
  double ar_worst_root = 0.0;  // max modulus over roots of det(I - sum F_i z^-i)
  bool ma_min_phase = false;
  double ma_worst_root = 0.0;  // max modulus over roots of det(I + sum G_j z^-j)
  bool pass = false;
};

namespace detail {

inline void check_shapes(const ArmaNoiseModel& m) {
  const Eigen::Index n = m.n();
  if (n == 0) throw std::invalid_argument("noise model: Vhat is empty");
  if (m.Vhat.rows() != m.Vhat.cols())
    throw std::invalid_argument("noise model: Vhat must be square");
  for (int i = 0; i < m.p(); ++i)
    if (m.F[i].rows() != n || m.F[i].cols() != n)
      throw std::invalid_argument("noise model: F" + std::to_string(i + 1) +
                                  " is not " + std::to_string(n) + "x" + std::to_string(n));
  for (int j = 0; j < m.q(); ++j)
    if (m.G[j].rows() != n || m.G[j].cols() != n)
      throw std::invalid_argument("noise model: G" + std::to_string(j + 1) +
                                  " is not " + std::to_string(n) + "x" + std::to_string(n));
  if (!m.Vhat.allFinite())
    throw std::invalid_argument("noise model: Vhat has non-finite entries");
  for (const Mat& f : m.F)
    if (!f.allFinite()) throw std::invalid_argument("noise model: F tap has non-finite entries");
  for (const Mat& g : m.G)
    if (!g.allFinite()) throw std::invalid_argument("noise model: G tap has non-finite entries");
}

// Worst root modulus of det(I + sign * sum taps[i] z^-i); 0 when there are no taps.
inline double worst_root_modulus(const std::vector<Mat>& taps, double sign, Eigen::Index n) {
  if (taps.empty()) return 0.0;
  std::vector<Mat> coeffs;
  coeffs.push_back(Mat::Identity(n, n));
  for (const Mat& t : taps) coeffs.push_back(sign * t);
  double worst = 0.0;
  for (const auto& r : polynomial_matrix_roots(coeffs)) worst = std::max(worst, std::abs(r));
  return worst;
}

}  // namespace detail

/// Checks Vhat SPD, AR stability, MA minimum phase. Shape mismatches throw;
/// invariant violations are reported, pass = all three hold.
inline NoiseValidation validate(const ArmaNoiseModel& m) {
  detail::check_shapes(m);
  NoiseValidation out;
  const double scale = max_abs(m.Vhat);
  if (max_abs(m.Vhat - m.Vhat.transpose()) > tol::sym_rel * scale)
    throw std::invalid_argument("noise model: Vhat is not symmetric");
  SymEig se = sym_eig(m.Vhat);
  out.vhat_min_eig = se.lambda(se.lambda.size() - 1);
  out.vhat_spd = out.vhat_min_eig > 0.0;
  out.ar_worst_root = detail::worst_root_modulus(m.F, -1.0, m.n());
  out.ar_stable = out.ar_worst_root < 1.0;
  out.ma_worst_root = detail::worst_root_modulus(m.G, +1.0, m.n());
  out.ma_min_phase = out.ma_worst_root < 1.0;
  out.pass = out.vhat_spd && out.ar_stable && out.ma_min_phase;
  return out;
}

/// validate() and throw with a diagnostic naming the violated invariant.
inline void require_valid(const ArmaNoiseModel& m) {
  NoiseValidation v = validate(m);
  if (v.pass) return;
  std::ostringstream os;
  if (!v.vhat_spd)
    os << "Vhat is not positive definite (min eigenvalue " << v.vhat_min_eig << " <= 0)";
  else if (!v.ar_stable)
    os << "AR polynomial root modulus " << v.ar_worst_root << " >= 1 (stability violated)";
  else
    os << "MA polynomial root modulus " << v.ma_worst_root << " >= 1 (minimum phase violated)";
  throw std::invalid_argument("noise model invalid: " + os.str());
}

/// Taps H_i of the inverse shaping filter F^{-1}(z) = I - sum_{i>=1} H_i z^-i,
/// i.e. of (I - sum F_i z^-i)(I + sum G_j z^-j)^{-1}.
struct ImpulseResponse {
  std::vector<Mat> H;
  int L() const { return static_cast<int>(H.size()); }
};

/// First L taps by the convolution recursion
///   H_k = F_k + G_k - sum_{i=1..k-1} H_i G_{k-i}
/// (taps beyond p or q read as zero). Requires L >= max(p, q).
inline ImpulseResponse inverse_filter_taps(const ArmaNoiseModel& m, int L) {
  detail::check_shapes(m);
  const int pq = std::max(m.p(), m.q());
  if (L < pq)
    throw std::invalid_argument("inverse_filter_taps: L=" + std::to_string(L) +
                                " < max(p,q)=" + std::to_string(pq));
  const Eigen::Index n = m.n();
  ImpulseResponse out;
  out.H.reserve(L);
  for (int k = 1; k <= L; ++k) {
    Mat h = Mat::Zero(n, n);
    if (k <= m.p()) h += m.F[k - 1];
    if (k <= m.q()) h += m.G[k - 1];
    for (int i = std::max(1, k - m.q()); i < k; ++i)
      h -= out.H[i - 1] * m.G[k - i - 1];
    out.H.push_back(std::move(h));
  }
  return out;
}

/// Auto-truncated taps: grows the recursion until the last max(p, q, 10)
/// taps all fall below trunc * (running peak), capped at trunc_cap.
/// Requires a validated (minimum-phase) model.
inline ImpulseResponse inverse_filter_taps(const ArmaNoiseModel& m) {
  require_valid(m);
  const int pq = std::max(m.p(), m.q());
  if (pq == 0) return {};
  const Eigen::Index n = m.n();
  const int guard = std::max(pq, 10);
  ImpulseResponse out;
  std::vector<double> mags;
  double peak = 0.0;
  for (int k = 1; k <= tol::trunc_cap; ++k) {
    Mat h = Mat::Zero(n, n);
    if (k <= m.p()) h += m.F[k - 1];
    if (k <= m.q()) h += m.G[k - 1];
    for (int i = std::max(1, k - m.q()); i < k; ++i)
      h -= out.H[i - 1] * m.G[k - i - 1];
    mags.push_back(max_abs(h));
    peak = std::max(peak, mags.back());
    out.H.push_back(std::move(h));
    if (k >= pq + guard) {
      bool decayed = true;
      for (int t = k - guard; t < k; ++t)
        if (mags[t] > tol::trunc * peak) { decayed = false; break; }
      if (decayed) {
        out.H.resize(k - guard);
        return out;
      }
    }
  }
  return out;
}

/// Burn-in used when sampling (transient discard).
inline int sample_burn_in(const ArmaNoiseModel& m) {
  return std::max(200, 20 * std::max(m.p(), m.q()));
}

/// Burn-in used by statistics over simulated paths.
inline int stats_burn_in(const ArmaNoiseModel& m) {
  return std::max(1000, 50 * std::max(m.p(), m.q()));
}

namespace detail {

// Deterministic standard normal stream: mt19937_64 + Box-Muller. Hand-rolled
// so that paths are bit-identical across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;          // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

struct NoisePath {
  Mat v;            // T x n, row k is v_k
  Mat innovations;  // T x n, row k is vhat_k
};

/// Sample T steps of the noise process. Zero initial state, transient of
/// sample_burn_in() steps discarded. Deterministic given (seed, T).
inline NoisePath sample_path(const ArmaNoiseModel& m, Eigen::Index T, std::uint64_t seed) {
  require_valid(m);
  if (T <= 0) throw std::invalid_argument("sample_path: T must be positive");
  const Eigen::Index n = m.n();
  Eigen::LLT<Mat> llt(m.Vhat);
  if (llt.info() != Eigen::Success)
    throw numeric_error("sample_path: Cholesky of Vhat failed");
  const Mat Lchol = llt.matrixL();
  detail::GaussianStream gs(seed);
  const int burn = sample_burn_in(m);
  const Eigen::Index total = T + burn;
  const int p = m.p(), q = m.q();
  std::vector<Vec> vhist(std::max(p, 1), Vec::Zero(n));
  std::vector<Vec> whist(std::max(q, 1), Vec::Zero(n));
  NoisePath out;
  out.v = Mat(T, n);
  out.innovations = Mat(T, n);
  Vec z(n);
  for (Eigen::Index k = 0; k < total; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gs.next();
    Vec w = Lchol * z;
    Vec v = w;
    for (int i = 1; i <= p; ++i)
      if (k >= i) v += m.F[i - 1] * vhist[(k - i) % p];
    for (int j = 1; j <= q; ++j)
      if (k >= j) v += m.G[j - 1] * whist[(k - j) % q];
    if (k >= burn) {
      out.v.row(k - burn) = v.transpose();
      out.innovations.row(k - burn) = w.transpose();
    }
    if (p > 0) vhist[k % p] = v;
    if (q > 0) whist[k % q] = w;
    if (max_abs(v) > tol::overflow_guard)
      throw numeric_error("sample_path: sample magnitude exceeded overflow guard");
  }
  return out;
}

/// Invert the shaping filter along a path: recover vhat from v with zero
/// initial conditions. Rows of v are time steps.
inline Mat whiten_path(const ArmaNoiseModel& m, const Mat& v) {
  detail::check_shapes(m);
  if (v.cols() != m.n())
    throw std::invalid_argument("whiten_path: path has " + std::to_string(v.cols()) +
                                " columns, model has n=" + std::to_string(m.n()));
  const Eigen::Index T = v.rows();
  const int p = m.p(), q = m.q();
  Mat w(T, m.n());
  for (Eigen::Index k = 0; k < T; ++k) {
    Vec x = v.row(k).transpose();
    for (int i = 1; i <= p; ++i)
      if (k - i >= 0) x -= m.F[i - 1] * v.row(k - i).transpose();
    for (int j = 1; j <= q; ++j)
      if (k - j >= 0) x -= m.G[j - 1] * w.row(k - j).transpose();
    w.row(k) = x.transpose();
  }
  return w;
}

}  // namespace acgn
