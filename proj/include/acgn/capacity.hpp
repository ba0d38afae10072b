#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "acgn/kalman.hpp"
#include "acgn/linalg.hpp"
#include "acgn/noise.hpp"

namespace acgn {

enum class SignPolicy { automatic, plus, minus };
enum class Method { waterfill, independent_1d, general_search };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::waterfill: return "waterfill";
    case Method::independent_1d: return "independent_1d";
    default: return "general_search";
  }
}

/// Power split over the eigenchannels of Vhat. P(l) pairs with the l-th
/// entry of the eigenvalue vector the allocation was built against.
struct Allocation {
  Vec P;       // >= 0
  Vec a;       // a_l = sqrt(1 + P_l / vhat_l) >= 1
  IVec signs;  // +1 or -1 per channel
  double rate_bits = 0.0;  // sum of 0.5 log2(1 + P_l / vhat_l)
};

/// A complete channel design: the open-loop matrix A with eigenvalues
/// s_l * a_l on the eigenbasis of Vhat, the measurement matrix C that makes
/// the whitened-innovation filter see Chat = I, the stationary error
/// covariance P, and the observer gain Khat = A P (P + Vhat)^{-1}.
struct ChannelDesign {
  Mat A;
  Mat C;
  Mat P;
  Mat Khat;
  Mat U;          // eigenbasis used, columns pair with vhat_eigs
  Vec vhat_eigs;  // innovation variances per eigenchannel
  Allocation alloc;
  double transmit_power = 0.0;  // tr(C P C^T)
  double are_residual = 0.0;
};

struct OptimizerDiagnostics {
  int starts = 0;
  int sweeps = 0;
  long evals = 0;
  double start_rate = 0.0;  // best projected start before ascent
  double budget_residual = 0.0;  // (power - budget) / budget
  bool polished = false;
  std::string notes;
};

struct CapacityResult {
  double lower_bound_bits = 0.0;
  double budget = 0.0;
  Method method = Method::general_search;
  ChannelDesign design;
  OptimizerDiagnostics diagnostics;
};

namespace detail {

inline void check_alloc_args(const Vec& eigs, const Vec& P_alloc, const IVec& signs) {
  if (P_alloc.size() != eigs.size() || signs.size() != eigs.size())
    throw std::invalid_argument("allocation: size mismatch with eigenchannel count");
  if ((eigs.array() <= 0.0).any())
    throw std::invalid_argument("allocation: Vhat eigenvalues must be positive");
  for (Eigen::Index l = 0; l < P_alloc.size(); ++l) {
    if (!(P_alloc(l) >= 0.0))
      throw std::invalid_argument("allocation: powers must be nonnegative");
    if (signs(l) != 1 && signs(l) != -1)
      throw std::invalid_argument("allocation: signs must be +1 or -1");
  }
  if (P_alloc.maxCoeff() <= 0.0)
    throw std::invalid_argument("allocation: total power must be positive");
}

inline Allocation make_alloc(const Vec& eigs, const Vec& P_alloc, const IVec& signs) {
  Allocation al;
  al.P = P_alloc;
  al.signs = signs;
  al.a = (Vec::Ones(eigs.size()) + P_alloc.cwiseQuotient(eigs)).cwiseSqrt();
  al.rate_bits = 0.0;
  for (Eigen::Index l = 0; l < eigs.size(); ++l)
    al.rate_bits += 0.5 * std::log2(1.0 + P_alloc(l) / eigs(l));
  return al;
}

/// Design in an explicit eigenbasis of Vhat (U orthogonal, Vhat = U diag(eigs) U^T).
inline ChannelDesign design_in_basis(const ArmaNoiseModel& m, const Mat& U,
                                     const Vec& eigs, const Vec& P_alloc,
                                     const IVec& signs) {
  check_alloc_args(eigs, P_alloc, signs);
  const Eigen::Index n = eigs.size();
  ChannelDesign d;
  d.U = U;
  d.vhat_eigs = eigs;
  d.alloc = make_alloc(eigs, P_alloc, signs);
  Vec lambda(n);
  for (Eigen::Index l = 0; l < n; ++l) lambda(l) = signs(l) * d.alloc.a(l);
  d.A = U * lambda.asDiagonal() * U.transpose();
  d.C = design_c_for_identity(U, lambda, m);
  d.P = U * P_alloc.asDiagonal() * U.transpose();
  const Mat S = d.P + m.Vhat;
  d.Khat = d.A * Eigen::LDLT<Mat>(S).solve(d.P).transpose();
  d.are_residual = max_abs(d.P - riccati_step(d.P, d.A, Mat::Identity(n, n), m.Vhat)) /
                   (1.0 + max_abs(d.P));
  if (d.are_residual > tol::are_check)
    throw numeric_error("design: Riccati residual " + std::to_string(d.are_residual) +
                        " exceeds tolerance");
  d.transmit_power = (d.C * d.P * d.C.transpose()).trace();
  return d;
}

}  // namespace detail

/// Build the channel design for a given eigenchannel power split with
/// per-channel pole signs. P_alloc pairs with the descending eigenvalues
/// of Vhat as returned by sym_eig.
inline ChannelDesign build_design(const ArmaNoiseModel& m, const Vec& P_alloc,
                                  const IVec& signs) {
  require_valid(m);
  SymEig se = sym_eig(m.Vhat);
  return detail::design_in_basis(m, se.U, se.lambda, P_alloc, signs);
}

/// Same with one global sign (+1 or -1) on every pole.
inline ChannelDesign build_design(const ArmaNoiseModel& m, const Vec& P_alloc,
                                  int sign = +1) {
  return build_design(m, P_alloc, IVec::Constant(P_alloc.size(), sign));
}

/// Classic water-filling over positive noise variances: P_l = max(0, z - v_l)
/// with the level z chosen so the powers sum to the budget.
inline Allocation waterfill(const Vec& eigs, double budget) {
  if (eigs.size() == 0) throw std::invalid_argument("waterfill: empty eigenvalue list");
  if ((eigs.array() <= 0.0).any())
    throw std::invalid_argument("waterfill: eigenvalues must be positive");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  double lo = eigs.minCoeff();
  double hi = eigs.maxCoeff() + budget;
  auto total = [&](double z) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < eigs.size(); ++l) s += std::max(0.0, z - eigs(l));
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (total(mid) < budget ? lo : hi) = mid;
  }
  const double z = 0.5 * (lo + hi);
  Vec P(eigs.size());
  for (Eigen::Index l = 0; l < eigs.size(); ++l) P(l) = std::max(0.0, z - eigs(l));
  const double s = P.sum();
  if (s > 0.0) P *= budget / s;
  return detail::make_alloc(eigs, P, IVec::Constant(eigs.size(), 1));
}

namespace detail {

// Scalar channel helpers (diagonal models). w(x) = (1 + sum g_j x^-j) / (1 - sum f_i x^-i).
struct ScalarChannel {
  std::vector<double> f, g;
  double var = 0.0;

  double w(double x) const {
    double num = 1.0, den = 1.0, xp = 1.0;
    const std::size_t d = std::max(f.size(), g.size());
    for (std::size_t k = 1; k <= d; ++k) {
      xp /= x;
      if (k <= g.size()) num += g[k - 1] * xp;
      if (k <= f.size()) den -= f[k - 1] * xp;
    }
    return num / den;
  }

  // Stationary transmit power needed for pole magnitude a with pole sign s.
  double cost(double a, int s) const {
    const double ws = w(s * a);
    return ws * ws * (a * a - 1.0) * var;
  }
};

inline bool is_diagonal(const Mat& m) {
  const double scale = 1.0 + max_abs(m);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > 1e-12 * scale) return false;
  return true;
}

inline bool is_diagonal_model(const ArmaNoiseModel& m) {
  if (!is_diagonal(m.Vhat)) return false;
  for (const Mat& f : m.F)
    if (!is_diagonal(f)) return false;
  for (const Mat& g : m.G)
    if (!is_diagonal(g)) return false;
  return true;
}

inline std::vector<ScalarChannel> split_channels(const ArmaNoiseModel& m) {
  std::vector<ScalarChannel> ch(m.n());
  for (Eigen::Index l = 0; l < m.n(); ++l) {
    ch[l].var = m.Vhat(l, l);
    for (const Mat& f : m.F) ch[l].f.push_back(f(l, l));
    for (const Mat& g : m.G) ch[l].g.push_back(g(l, l));
  }
  return ch;
}

inline std::vector<int> allowed_signs(SignPolicy sp) {
  if (sp == SignPolicy::plus) return {+1};
  if (sp == SignPolicy::minus) return {-1};
  return {+1, -1};
}

// Golden-section maximization of fn on [lo, hi], fixed iteration budget.
inline double golden_max(const std::function<double(double)>& fn, double lo,
                         double hi, int iters) {
  const double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - r * (hi - lo); f1 = fn(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + r * (hi - lo); f2 = fn(x2);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

struct InnerSolution {
  double a = 1.0;
  int sign = +1;
  double cost = 0.0;
  double value = 0.0;  // log2(a) - mu * cost
};

// Maximize log2(a) - mu * cost(a, s) over a >= 1 for one channel and one sign.
inline InnerSolution inner_max_one_sign(const ScalarChannel& ch, int s, double mu) {
  auto h = [&](double a) { return std::log2(a) - mu * ch.cost(a, s); };
  double cap = 4.0;
  while (cap < 1e12 && h(cap) > -50.0) cap *= 2.0;
  const int grid = 600;
  double best_a = 1.0, best_h = 0.0;
  const double step = std::log(cap) / grid;
  for (int i = 0; i <= grid; ++i) {
    const double a = std::exp(i * step);
    const double v = h(a);
    if (v > best_h) { best_h = v; best_a = a; }
  }
  double lo = std::max(1.0, best_a * std::exp(-step));
  double hi = std::min(cap, best_a * std::exp(step));
  double a = golden_max(h, lo, hi, 120);
  if (h(a) < best_h) a = best_a;
  if (h(1.0) >= h(a)) a = 1.0;
  InnerSolution out;
  out.a = a;
  out.sign = s;
  out.cost = ch.cost(a, s);
  out.value = h(a);
  return out;
}

inline InnerSolution inner_max(const ScalarChannel& ch, const std::vector<int>& signs,
                               double mu) {
  InnerSolution best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int s : signs) {
    InnerSolution cand = inner_max_one_sign(ch, s, mu);
    if (cand.value > best.value) best = cand;
  }
  return best;
}

}  // namespace detail

/// Corollary route for diagonal models: per-channel 1-D problems tied by a
/// Lagrange multiplier on the total stationary transmit power
///   sum_l w_l(s_l a_l)^2 (a_l^2 - 1) var_l = budget,
/// maximizing sum_l log2(a_l). Signs per channel unless forced by policy.
inline CapacityResult solve_independent(const ArmaNoiseModel& m, double budget,
                                        SignPolicy sp = SignPolicy::automatic) {
  require_valid(m);
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  if (!detail::is_diagonal_model(m))
    throw std::invalid_argument("solve_independent requires a diagonal model");
  const Eigen::Index n = m.n();
  auto channels = detail::split_channels(m);
  const auto signs = detail::allowed_signs(sp);
  OptimizerDiagnostics diag;

  auto solve_at = [&](double mu) {
    std::vector<detail::InnerSolution> sol(n);
    double total = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      sol[l] = detail::inner_max(channels[l], signs, mu);
      total += sol[l].cost;
      diag.evals += 1;
    }
    return std::make_pair(sol, total);
  };

  double mu_hi = 1.0, mu_lo = 1.0;
  for (int it = 0; it < 400 && solve_at(mu_hi).second > budget; ++it) mu_hi *= 2.0;
  for (int it = 0; it < 1200 && solve_at(mu_lo).second < budget; ++it) mu_lo *= 0.5;
  if (solve_at(mu_lo).second < budget)
    throw numeric_error("solve_independent: failed to bracket the power constraint");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(mu_lo * mu_hi);
    (solve_at(mid).second >= budget ? mu_lo : mu_hi) = mid;
  }
  auto [sol_hi, total_hi] = solve_at(mu_hi);
  auto [sol_lo, total_lo] = solve_at(mu_lo);
  // Feasible side first; fall back to the other side if it carries no power.
  auto& base = total_hi > 0.0 ? sol_hi : sol_lo;

  Vec P(n);
  IVec sg(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const double a = base[l].a;
    P(l) = (a * a - 1.0) * channels[l].var;
    sg(l) = base[l].sign;
  }

  // Radial polish to restore budget equality after a Lagrangian jump.
  auto power_of = [&](double t) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double a = std::sqrt(1.0 + t * P(l) / channels[l].var);
      s += channels[l].cost(a, sg(l));
    }
    return s;
  };
  double t_hi = 1.0;
  for (int it = 0; it < 300 && power_of(t_hi) < budget; ++it) t_hi *= 2.0;
  double t_lo = t_hi > 1.0 ? t_hi / 2.0 : 0.0;
  while (t_lo > 0.0 && power_of(t_lo) > budget) { t_hi = t_lo; t_lo /= 2.0; }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    (power_of(mid) < budget ? t_lo : t_hi) = mid;
  }
  const double t = 0.5 * (t_lo + t_hi);
  diag.polished = std::abs(t - 1.0) > 1e-9;
  P *= t;

  Vec eigs(n);
  for (Eigen::Index l = 0; l < n; ++l) eigs(l) = channels[l].var;
  CapacityResult res;
  res.method = Method::independent_1d;
  res.budget = budget;
  res.design = detail::design_in_basis(m, Mat::Identity(n, n), eigs, P, sg);
  res.lower_bound_bits = res.design.alloc.rate_bits;
  diag.budget_residual = (res.design.transmit_power - budget) / budget;
  if (std::abs(diag.budget_residual) > tol::pow_rel)
    throw numeric_error("solve_independent: power constraint missed by " +
                        std::to_string(diag.budget_residual));
  if (diag.polished) diag.notes = "radial polish applied after Lagrangian jump";
  res.diagnostics = diag;
  return res;
}

/// Scalar case: largest pole magnitude whose stationary power meets the
/// budget with equality, per sign, best sign kept. rate = log2(a).
inline CapacityResult scalar_bound(const std::vector<double>& f,
                                   const std::vector<double>& g, double var,
                                   double budget,
                                   SignPolicy sp = SignPolicy::automatic) {
  if (!(var > 0.0)) throw std::invalid_argument("scalar_bound: variance must be positive");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  ArmaNoiseModel m;
  m.Vhat = Mat::Constant(1, 1, var);
  for (double fi : f) m.F.push_back(Mat::Constant(1, 1, fi));
  for (double gj : g) m.G.push_back(Mat::Constant(1, 1, gj));
  require_valid(m);
  detail::ScalarChannel ch{f, g, var};

  double best_a = 0.0;
  int best_sign = +1;
  for (int s : detail::allowed_signs(sp)) {
    double cap = 4.0;
    while (cap < 1e12 && ch.cost(cap, s) < budget) cap *= 2.0;
    const int grid = 4000;
    const double step = std::log(cap) / grid;
    double lo = -1.0, hi = -1.0;
    for (int i = grid; i >= 1; --i) {  // largest crossing of cost = budget
      const double a1 = std::exp((i - 1) * step), a2 = std::exp(i * step);
      const bool below1 = ch.cost(a1, s) < budget, below2 = ch.cost(a2, s) < budget;
      if (below1 != below2) { lo = a1; hi = a2; break; }
    }
    if (lo < 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ch.cost(mid, s) < budget ? lo : hi) = mid;
    }
    const double a = 0.5 * (lo + hi);
    if (a > best_a) { best_a = a; best_sign = s; }
  }
  if (best_a <= 1.0)
    throw numeric_error("scalar_bound: no pole magnitude > 1 meets the budget");

  CapacityResult res;
  res.method = Method::independent_1d;
  res.budget = budget;
  Vec P(1);
  P(0) = (best_a * best_a - 1.0) * var;
  res.design = detail::design_in_basis(m, Mat::Identity(1, 1), m.Vhat.diagonal(),
                                       P, IVec::Constant(1, best_sign));
  res.lower_bound_bits = res.design.alloc.rate_bits;
  res.diagnostics.budget_residual = (res.design.transmit_power - budget) / budget;
  return res;
}

namespace detail {

struct GeneralEvaluator {
  const ArmaNoiseModel* m;
  Mat U;
  Vec eigs;
  long evals = 0;

  double power(const Vec& P, const IVec& sg) {
    ++evals;
    const Eigen::Index n = eigs.size();
    Vec lambda(n);
    for (Eigen::Index l = 0; l < n; ++l)
      lambda(l) = sg(l) * std::sqrt(1.0 + P(l) / eigs(l));
    Mat C = design_c_for_identity(U, lambda, *m);
    Mat Pm = U * P.asDiagonal() * U.transpose();
    return (C * Pm * C.transpose()).trace();
  }

  double rate(const Vec& P) const {
    double r = 0.0;
    for (Eigen::Index l = 0; l < eigs.size(); ++l)
      r += 0.5 * std::log2(1.0 + P(l) / eigs(l));
    return r;
  }

  // Scale a direction onto the power-budget surface. Returns scaled powers.
  Vec project(const Vec& dir, const IVec& sg, double budget) {
    if (dir.maxCoeff() <= 0.0)
      throw std::invalid_argument("project: direction must carry power");
    double t_hi = 1.0;
    int guard = 0;
    while (power(t_hi * dir, sg) < budget && guard++ < 300) t_hi *= 2.0;
    double t_lo = t_hi;
    guard = 0;
    while (power(t_lo * dir, sg) > budget && guard++ < 300) t_lo *= 0.5;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      (power(mid * dir, sg) < budget ? t_lo : t_hi) = mid;
    }
    return 0.5 * (t_lo + t_hi) * dir;
  }
};

}  // namespace detail

/// General lower-bound search: multi-start projected coordinate ascent over
/// eigenchannel powers on the budget surface. Deterministic; optional seeded
/// random restarts. Starts include water-filling, uniform, per-channel
/// spikes (for each allowed global sign) and, on diagonal models, the
/// independent Lagrangian solution with its per-channel signs.
inline CapacityResult solve_general(const ArmaNoiseModel& m, double budget,
                                    SignPolicy sp = SignPolicy::automatic,
                                    int restarts = 0, std::uint64_t seed = 1) {
  require_valid(m);
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  const Eigen::Index n = m.n();
  SymEig se = sym_eig(m.Vhat);
  detail::GeneralEvaluator ev{&m, se.U, se.lambda};
  OptimizerDiagnostics diag;

  struct Candidate { Vec P; IVec sg; double rate; };
  std::vector<Candidate> starts;
  auto add_start = [&](const Vec& dir, const IVec& sg) {
    Vec d = dir.cwiseMax(0.0);
    if (d.maxCoeff() <= 0.0) return;
    Vec P = ev.project(d, sg, budget);
    starts.push_back({P, sg, ev.rate(P)});
  };

  Allocation wf = waterfill(se.lambda, budget);
  for (int s : detail::allowed_signs(sp)) {
    IVec sg = IVec::Constant(n, s);
    add_start(wf.P, sg);
    add_start(Vec::Constant(n, budget / static_cast<double>(n)), sg);
    for (Eigen::Index l = 0; l < n; ++l) add_start(Vec::Unit(n, l) * budget, sg);
  }
  if (detail::is_diagonal_model(m)) {
    try {
      CapacityResult ind = solve_independent(m, budget, sp);
      // design_in_basis used the identity basis there; re-express on se.U.
      Vec P(n);
      IVec sg(n);
      for (Eigen::Index l = 0; l < n; ++l) {
        // Map each sorted eigenchannel back to its diagonal coordinate.
        Eigen::Index coord = 0;
        se.U.col(l).cwiseAbs().maxCoeff(&coord);
        P(l) = ind.design.alloc.P(coord);
        sg(l) = ind.design.alloc.signs(coord);
      }
      add_start(P.cwiseMax(1e-300), sg);
      diag.notes = "seeded from independent_1d";
    } catch (const std::exception&) {
      // Independent route can legitimately fail on exotic inputs; ignore.
    }
  }
  std::mt19937_64 rng(seed);
  for (int r = 0; r < restarts; ++r) {
    Vec dir(n);
    for (Eigen::Index l = 0; l < n; ++l) {
      const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
      dir(l) = -std::log(u);
    }
    for (int s : detail::allowed_signs(sp)) add_start(dir, IVec::Constant(n, s));
  }
  diag.starts = static_cast<int>(starts.size());
  for (const auto& c : starts) diag.start_rate = std::max(diag.start_rate, c.rate);

  Candidate best;
  best.rate = -1.0;
  for (auto& start : starts) {
    Vec P = start.P;
    const IVec sg = start.sg;
    double rate = start.rate;
    int sweep = 0;
    for (; sweep < 40; ++sweep) {
      bool improved = false;
      for (Eigen::Index l = 0; l < n; ++l) {
        const double rest = P.sum() - P(l);
        auto try_x = [&](double x) {
          Vec cand = P;
          cand(l) = x;
          if (cand.maxCoeff() <= 0.0) return;
          Vec proj = ev.project(cand, sg, budget);
          const double r = ev.rate(proj);
          if (r > rate + 1e-13) {
            rate = r;
            P = proj;
            improved = true;
          }
        };
        try_x(0.0);
        const double base = rest > 0.0 ? rest : budget;
        for (int i = 0; i < 16; ++i)
          try_x(base * std::pow(10.0, -4.0 + 6.0 * i / 15.0));
        const double center = P(l) > 0.0 ? P(l) : base * 1e-2;
        const double x = detail::golden_max(
            [&](double lx) {
              Vec cand = P;
              cand(l) = std::exp(lx);
              Vec proj = ev.project(cand, sg, budget);
              return ev.rate(proj);
            },
            std::log(center) - 3.0, std::log(center) + 3.0, 48);
        try_x(std::exp(x));
      }
      if (!improved) break;
    }
    diag.sweeps = std::max(diag.sweeps, sweep);
    const bool better =
        rate > best.rate + 1e-15 ||
        (std::abs(rate - best.rate) <= 1e-15 && best.P.size() == P.size() &&
         std::lexicographical_compare(P.data(), P.data() + P.size(),
                                      best.P.data(), best.P.data() + best.P.size()));
    if (best.rate < 0.0 || better) best = {P, sg, rate};
  }
  if (best.rate < 0.0) throw numeric_error("solve_general: no feasible start");

  diag.evals = ev.evals;
  CapacityResult res;
  res.method = Method::general_search;
  res.budget = budget;
  res.design = detail::design_in_basis(m, se.U, se.lambda, best.P, best.sg);
  res.lower_bound_bits = res.design.alloc.rate_bits;
  diag.budget_residual = (res.design.transmit_power - budget) / budget;
  if (std::abs(diag.budget_residual) > tol::pow_rel)
    throw numeric_error("solve_general: power constraint missed by " +
                        std::to_string(diag.budget_residual));
  res.diagnostics = diag;
  return res;
}

}  // namespace acgn
