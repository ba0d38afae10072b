#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace acgn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;
using CMat = Eigen::MatrixXcd;

// Raised for numerical failures (non-convergence, instability) as opposed to
// bad user input.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {
inline constexpr double sym_rel = 1e-9;     // symmetry check, relative to max|m|
inline constexpr double eig_rel = 1e-10;    // eigen reconstruction, relative
inline constexpr double are_rel = 1e-10;    // ARE fixed point convergence
inline constexpr double are_check = 1e-9;   // ARE residual verification
inline constexpr double rank = 1e-9;        // singular value cutoff, relative
inline constexpr double pow_rel = 1e-8;     // power budget match, relative
inline constexpr double quad_bits = 1e-6;   // quadrature node-doubling, bits
inline constexpr double trunc = 1e-12;      // impulse response truncation
inline constexpr int max_iter = 100000;     // fixed point iteration cap
inline constexpr int trunc_cap = 10000;     // impulse response length cap
inline constexpr double overflow_guard = 1e9;
}  // namespace tol

inline double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Kronecker product a ⊗ b, (ma*mb) x (na*nb).
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-stacking of a square matrix into an n^2 vector.
inline Vec vec(const Mat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("vec: input must be square, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  return Eigen::Map<const Vec>(m.data(), m.size());
}

/// Inverse of vec: reshape an n^2 vector into n x n, column-major.
inline Mat unvec(const Vec& v, Eigen::Index n) {
  if (v.size() != n * n)
    throw std::invalid_argument("unvec: length " + std::to_string(v.size()) +
                                " does not match n=" + std::to_string(n));
  return Eigen::Map<const Mat>(v.data(), n, n);
}

struct SymEig {
  Mat U;       // orthonormal columns, paired with lambda
  Vec lambda;  // descending
};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Rejects inputs whose asymmetry exceeds sym_rel * max|m|.
inline SymEig sym_eig(const Mat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("sym_eig: input must be square");
  const double scale = max_abs(m);
  if (max_abs(m - m.transpose()) > tol::sym_rel * scale)
    throw std::invalid_argument("sym_eig: input is not symmetric (max|m - m^T| = " +
                                std::to_string(max_abs(m - m.transpose())) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw numeric_error("sym_eig: eigensolver failed to converge");
  const Eigen::Index n = m.rows();
  SymEig out;
  out.U = Mat(n, n);
  out.lambda = Vec(n);
  for (Eigen::Index i = 0; i < n; ++i) {  // Eigen sorts ascending
    out.lambda(i) = es.eigenvalues()(n - 1 - i);
    out.U.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// Largest eigenvalue modulus of a square matrix (0 for the empty matrix).
inline double spectral_radius(const Mat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius: input must be square");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numeric_error("spectral_radius: eigensolver failed to converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Roots of det(sum_k coeffs[k] z^{d-k}) = 0, i.e. of the matrix polynomial
/// coeffs[0] + coeffs[1] z^{-1} + ... + coeffs[d] z^{-d} after clearing z^d.
/// Computed as eigenvalues of the block companion matrix; coeffs[0] must be
/// invertible. Degree 0 has no roots.
inline std::vector<std::complex<double>> polynomial_matrix_roots(
    const std::vector<Mat>& coeffs) {
  if (coeffs.empty())
    throw std::invalid_argument("polynomial_matrix_roots: empty coefficient list");
  const Eigen::Index n = coeffs[0].rows();
  for (const Mat& c : coeffs)
    if (c.rows() != n || c.cols() != n)
      throw std::invalid_argument("polynomial_matrix_roots: coefficients must be square and same size");
  const std::size_t d = coeffs.size() - 1;
  if (d == 0) return {};
  Eigen::FullPivLU<Mat> lead(coeffs[0]);
  if (!lead.isInvertible())
    throw std::invalid_argument("polynomial_matrix_roots: leading coefficient is singular");
  Mat companion = Mat::Zero(n * d, n * d);
  for (std::size_t k = 1; k <= d; ++k)
    companion.block(0, (k - 1) * n, n, n) = -lead.solve(coeffs[k]);
  for (std::size_t k = 1; k < d; ++k)
    companion.block(k * n, (k - 1) * n, n, n) = Mat::Identity(n, n);
  Eigen::EigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numeric_error("polynomial_matrix_roots: eigensolver failed to converge");
  std::vector<std::complex<double>> roots(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    roots[i] = es.eigenvalues()(i);
  return roots;
}

}  // namespace acgn
