#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "acgn/linalg.hpp"
#include "acgn/noise.hpp"

namespace acgn {

struct PlantSpec {
  Mat A;
  Mat C;
  ArmaNoiseModel noise;
};

/// One observer-form Riccati step:
///   P' = A P A^T - A P C^T (C P C^T + V)^{-1} C P A^T, symmetrized.
inline Mat riccati_step(const Mat& P, const Mat& A, const Mat& C, const Mat& V) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || P.rows() != n || P.cols() != n || C.cols() != n ||
      V.rows() != C.rows() || V.cols() != C.rows())
    throw std::invalid_argument("riccati_step: dimension mismatch");
  const Mat S = C * P * C.transpose() + V;
  Eigen::LDLT<Mat> ldlt(S);
  if (ldlt.info() != Eigen::Success)
    throw numeric_error("riccati_step: innovation covariance is not positive definite");
  const Mat W = ldlt.solve(C * P * A.transpose());
  Mat out = A * P * A.transpose() - (A * P * C.transpose()) * W;
  return 0.5 * (out + out.transpose());
}

struct FilterSolution {
  Mat P;             // stabilizing ARE solution (PSD)
  Mat K;             // observer gain A P C^T (C P C^T + V)^{-1}
  int iterations = 0;
  double residual = 0.0;  // ||P - riccati_step(P)||_max / (1 + ||P||_max)
  double closed_loop_radius = 0.0;  // spectral_radius(A - K C)
  bool degenerate = false;          // closed loop at the unit circle (P -> 0 limit)
};

/// Fixed-point ARE iteration from P0 (defaults to V). Converges when the step
/// change falls below are_rel * (1 + ||P||); throws numeric_error past max_iter.
inline FilterSolution solve_are(const Mat& A, const Mat& C, const Mat& V,
                                const Mat& P0 = Mat(), int max_iter = tol::max_iter) {
  Mat P = P0.size() == 0 ? V : P0;
  if (max_abs(P) == 0.0)
    throw std::invalid_argument("solve_are: P0 = 0 is the non-stabilizing fixed point");
  FilterSolution out;
  double diff = 0.0;
  int k = 0;
  for (; k < max_iter; ++k) {
    Mat Pn = riccati_step(P, A, C, V);
    diff = max_abs(Pn - P) / (1.0 + max_abs(P));
    P = std::move(Pn);
    if (diff <= tol::are_rel) break;
  }
  if (diff > tol::are_rel) {
    std::ostringstream os;
    os << "solve_are: no convergence after " << max_iter
       << " iterations (last step " << diff << ")";
    throw numeric_error(os.str());
  }
  out.P = P;
  out.iterations = k + 1;
  out.residual = max_abs(P - riccati_step(P, A, C, V)) / (1.0 + max_abs(P));
  const Mat S = C * P * C.transpose() + V;
  out.K = Eigen::LDLT<Mat>(S).solve(C * P * A.transpose()).transpose();
  out.closed_loop_radius = spectral_radius(A - out.K * C);
  // A mode of A sitting on the unit circle drives its block of P to zero and
  // parks the closed loop at radius 1; the fixed point is still accepted.
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(A, false).eigenvalues();
  out.degenerate = (ev.cwiseAbs().array() - 1.0).abs().minCoeff() <= 1e-9;
  return out;
}

namespace detail {

// M_f = I - sum kron(Lambda^-i, F_i),  M_g = I + sum kron(Lambda^-j, G_j)
// for Lambda = diag(lambda). Requires |lambda_l| >= 1.
inline void kron_filter_mats(const Vec& lambda, const ArmaNoiseModel& m,
                             Mat* Mf, Mat* Mg) {
  const Eigen::Index n = lambda.size();
  for (Eigen::Index l = 0; l < n; ++l)
    if (std::abs(lambda(l)) < 1.0 - 1e-12)
      throw std::invalid_argument("eigenvalue modulus " + std::to_string(std::abs(lambda(l))) +
                                  " < 1; open-loop poles must be marginally stable or unstable");
  const Eigen::Index N = n * n;
  *Mf = Mat::Identity(N, N);
  *Mg = Mat::Identity(N, N);
  Vec linv = lambda.cwiseInverse();
  Vec pow = Vec::Ones(n);
  const int depth = std::max(m.p(), m.q());
  for (int i = 1; i <= depth; ++i) {
    pow = pow.cwiseProduct(linv);
    Mat D = pow.asDiagonal();
    if (i <= m.p()) *Mf -= kron(D, m.F[i - 1]);
    if (i <= m.q()) *Mg += kron(D, m.G[i - 1]);
  }
}

}  // namespace detail

/// Effective measurement matrix seen by the whitened-innovation filter:
///   Chat = unvec[(T^-T x I)(I - sum Lambda^-i x F_i)(I + sum Lambda^-j x G_j)^{-1}(T^T x I) vec(C)]
/// where A = T Lambda T^{-1}, Lambda = diag(lambda), x is the Kronecker product.
inline Mat compute_chat(const Mat& T, const Vec& lambda, const Mat& C,
                        const ArmaNoiseModel& m) {
  const Eigen::Index n = lambda.size();
  if (T.rows() != n || T.cols() != n || C.rows() != n || C.cols() != n)
    throw std::invalid_argument("compute_chat: dimension mismatch");
  Mat Mf, Mg;
  detail::kron_filter_mats(lambda, m, &Mf, &Mg);
  Eigen::FullPivLU<Mat> Tlu(T);
  if (!Tlu.isInvertible())
    throw std::invalid_argument("compute_chat: T is singular");
  const Mat In = Mat::Identity(n, n);
  Vec rhs = kron(T.transpose(), In) * vec(C);
  Eigen::PartialPivLU<Mat> Mglu(Mg);
  Vec x = Mglu.solve(rhs);
  if (!x.allFinite())
    throw numeric_error("compute_chat: MA Kronecker factor is singular");
  Vec y = Mf * x;
  Mat Tinv = Tlu.inverse();
  return unvec(kron(Tinv.transpose(), In) * y, n);
}

/// Inverse map: the C that makes compute_chat(T, lambda, C, m) = I:
///   C = unvec[(T^-T x I)(I + sum Lambda^-j x G_j)(I - sum Lambda^-i x F_i)^{-1}(T^T x I) vec(I)]
inline Mat design_c_for_identity(const Mat& T, const Vec& lambda,
                                 const ArmaNoiseModel& m) {
  const Eigen::Index n = lambda.size();
  if (T.rows() != n || T.cols() != n)
    throw std::invalid_argument("design_c_for_identity: dimension mismatch");
  Mat Mf, Mg;
  detail::kron_filter_mats(lambda, m, &Mf, &Mg);
  Eigen::FullPivLU<Mat> Tlu(T);
  if (!Tlu.isInvertible())
    throw std::invalid_argument("design_c_for_identity: T is singular");
  const Mat In = Mat::Identity(n, n);
  Vec rhs = kron(T.transpose(), In) * vec(In);
  Eigen::FullPivLU<Mat> Mflu(Mf);
  if (!Mflu.isInvertible())
    throw numeric_error("design_c_for_identity: AR Kronecker factor is singular");
  Vec x = Mflu.solve(rhs);
  Vec y = Mg * x;
  Mat Tinv = Tlu.inverse();
  Mat C = unvec(kron(Tinv.transpose(), In) * y, n);
  Mat chk = compute_chat(T, lambda, C, m);
  if (max_abs(chk - In) > tol::are_check * (1.0 + max_abs(C)))
    throw numeric_error("design_c_for_identity: round trip failed to reproduce identity");
  return C;
}

/// Rank of the observability matrix [C; CA; ...; CA^{n-1}] with singular
/// values below rank * sigma_max treated as zero.
inline int observability_rank(const Mat& A, const Mat& C) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.cols() != n)
    throw std::invalid_argument("observability_rank: dimension mismatch");
  Mat O(C.rows() * n, n);
  Mat block = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    O.middleRows(i * C.rows(), C.rows()) = block;
    block = block * A;
  }
  Eigen::JacobiSVD<Mat> svd(O);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol::rank * sv(0)) ++rank;
  return rank;
}

/// Plant sanity report: open-loop poles all outside or on the unit circle,
/// and (A, C) observable.
struct PlantCheck {
  double min_pole_modulus = 0.0;
  bool anti_stable = false;
  int obs_rank = 0;
  bool observable = false;
};

inline PlantCheck check_plant(const PlantSpec& ps) {
  const Eigen::Index n = ps.A.rows();
  if (ps.A.cols() != n || ps.C.rows() != ps.noise.n() || ps.C.cols() != n)
    throw std::invalid_argument("check_plant: dimension mismatch");
  PlantCheck out;
  Eigen::EigenSolver<Mat> es(ps.A, false);
  out.min_pole_modulus = es.eigenvalues().cwiseAbs().minCoeff();
  out.anti_stable = out.min_pole_modulus >= 1.0 - 1e-12;
  out.obs_rank = observability_rank(ps.A, ps.C);
  out.observable = out.obs_rank == n;
  return out;
}

}  // namespace acgn
