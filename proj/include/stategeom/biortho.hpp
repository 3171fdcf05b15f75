#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "stategeom/common.hpp"
#include "stategeom/fs.hpp"
#include "stategeom/linalg.hpp"
#include "stategeom/state.hpp"
#include "stategeom/tensor.hpp"

namespace stategeom {

// Eigenvalues plus right/left eigenvector sets with <L_m|R_n> = delta_mn.
// Ordering is deterministic by (Re lambda, Im lambda); right vectors are unit
// norm with their largest-magnitude component made real positive.
struct BiorthoEigensystem {
  Eigen::VectorXcd eigenvalues;
  Mat right;  // columns
  Mat left;   // columns; H^dagger L_n = conj(lambda_n) L_n
};

inline void fix_gauge(Vec& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index m = 0; m < v.size(); ++m) {
    const double a = std::abs(v[m]);
    if (a > best + 1e-14) {  // ties resolve to the lowest index
      best = a;
      imax = m;
    }
  }
  const cxd z = v[imax];
  if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
}

inline BiorthoEigensystem biortho_eig(const Mat& h, double ep_tol = tol::ep_tol) {
  if (!h.allFinite()) throw Error(errc::non_finite, "Hamiltonian has non-finite entries");
  const Eigen::Index d = h.rows();
  Eigen::ComplexEigenSolver<Mat> es(h, true);
  if (es.info() != Eigen::Success)
    throw Error(errc::numerical, "eigendecomposition failed");
  Eigen::VectorXcd lam = es.eigenvalues();
  Mat v = es.eigenvectors();

  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::real(lam[a]) != std::real(lam[b])) return std::real(lam[a]) < std::real(lam[b]);
    return std::imag(lam[a]) < std::imag(lam[b]);
  });

  BiorthoEigensystem sys;
  sys.eigenvalues.resize(d);
  sys.right.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    sys.eigenvalues[k] = lam[order[k]];
    Vec col = v.col(order[k]);
    col.normalize();
    fix_gauge(col);
    sys.right.col(k) = col;
  }

  const double scale = std::max(1.0, sys.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = a + 1; b < d; ++b)
      if (std::abs(sys.eigenvalues[a] - sys.eigenvalues[b]) < ep_tol * scale)
        throw Error(errc::exceptional_point, "eigenvalue gap below exceptional-point tolerance");

  // Left vectors from the inverse of the right frame: <L_m|R_n> = delta_mn
  // by construction.
  Eigen::PartialPivLU<Mat> lu(sys.right);
  const Mat vinv = lu.solve(Mat::Identity(d, d));
  if (!vinv.allFinite())
    throw Error(errc::exceptional_point, "right eigenvector frame is numerically defective");
  sys.left = vinv.adjoint();

  // Unit-normalized left/right overlap vanishes at an exceptional point.
  for (Eigen::Index k = 0; k < d; ++k) {
    const double ov = 1.0 / sys.left.col(k).norm();  // |<Lhat_k|R_k>|, R_k unit
    if (ov < ep_tol)
      throw Error(errc::exceptional_point, "left-right overlap collapsed (defective matrix)");
  }
  return sys;
}

// The four inequivalent Fubini-Study-type tensors of the biorthogonal
// formalism, keyed by which states supply bra and ket and which
// normalization they require.
enum class NhKind { LR, RL, LL, RR };

inline const char* to_string(NhKind k) {
  switch (k) {
    case NhKind::LR: return "lr";
    case NhKind::RL: return "rl";
    case NhKind::LL: return "ll";
    default: return "rr";
  }
}

namespace detail {

struct BraKet {
  const StateFamily* bra;
  const StateFamily* ket;
};

inline BraKet pick_families(const StateFamily& left, const StateFamily& right, NhKind kind) {
  switch (kind) {
    case NhKind::LR: return {&left, &right};
    case NhKind::RL: return {&right, &left};
    case NhKind::LL: return {&left, &left};
    default: return {&right, &right};
  }
}

inline void require_kind_normalization(const PureState& bra, const PureState& ket,
                                       NhKind kind, const RVec& theta) {
  const double defect = std::abs(inner(bra, ket) - 1.0);
  if (defect > tol::eps_norm)
    throw Error(errc::normalization,
                std::string("normalization <bra|ket> = 1 violated for kind ") +
                    to_string(kind) + " (defect " + std::to_string(defect) + ")",
                theta);
}

}  // namespace detail

// FS^{bra,ket}_ij = <d_i bra|d_j ket> - <d_i bra|ket><bra|d_j ket>, for the
// requested kind. Refuses a pair whose normalization does not match the kind.
inline GeometricTensor nh_fs_tensor(const StateFamily& left, const StateFamily& right,
                                    const RVec& theta, NhKind kind) {
  const auto bk = detail::pick_families(left, right, kind);
  const PureState b = evaluate(*bk.bra, theta);
  const PureState k = evaluate(*bk.ket, theta);
  detail::require_kind_normalization(b, k, kind, theta);
  const int n = bk.bra->n;
  std::vector<Vec> db(n), dk(n);
  for (int i = 0; i < n; ++i) {
    db[i] = derivative(*bk.bra, theta, i);
    dk[i] = derivative(*bk.ket, theta, i);
  }
  Mat T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      T(i, j) = inner_on(b, db[i], dk[j]) -
                inner_on(b, db[i], k.amplitudes) * inner_on(b, b.amplitudes, dk[j]);
  return GeometricTensor(T);
}

// Complex Berry curvature B_ij = d_i A_j - d_j A_i of the connection
// A_i = -i <bra|d_i ket>, evaluated by a central-difference curl. Relates to
// the tensor parts as B = 2*omega - 2i*omtilde (and collapses to the real
// field strength of the Hermitian theory when left = right).
inline Mat nh_berry_curvature(const StateFamily& left, const StateFamily& right,
                              const RVec& theta, NhKind kind) {
  const auto bk = detail::pick_families(left, right, kind);
  {
    const PureState b = evaluate(*bk.bra, theta);
    const PureState k = evaluate(*bk.ket, theta);
    detail::require_kind_normalization(b, k, kind, theta);
  }
  const int n = bk.bra->n;
  auto connection = [&](const RVec& th) {
    const PureState b = evaluate(*bk.bra, th);
    Vec A(n);
    for (int j = 0; j < n; ++j)
      A[j] = -I * inner_on(b, b.amplitudes, derivative(*bk.ket, th, j));
    return A;
  };
  Mat B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    // wider stencil: the connection itself carries first-derivative noise
    const double h = detail::step_for(bk.bra->fd_step2, theta[i]);
    RVec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const Vec dA = (connection(tp) - connection(tm)) / (2.0 * h);
    for (int j = 0; j < n; ++j) {
      B(i, j) += dA[j];
      B(j, i) -= dA[j];
    }
  }
  return B;
}

struct NhConnectionPair {
  ConnectionField first;   // Gamma^{LR} (or Gamma^{II})
  ConnectionField second;  // Gamma^{RL} (or its conjugate partner)
};

namespace detail {

// Gauge-invariant connection of the "12" type:
// <dd bra|d_k ket> - (<dd bra|ket><bra|d_k ket> + sym<d bra|ket><d bra|d_k ket>)
// + 2 <d_i bra|ket><d_j bra|ket><bra|d_k ket>.
inline ConnectionField gauge_connection_12(const StateFamily& braf, const StateFamily& ketf,
                                           const RVec& theta) {
  const PureState b = evaluate(braf, theta);
  const PureState k = evaluate(ketf, theta);
  const int n = braf.n;
  std::vector<Vec> db(n), dk(n);
  for (int i = 0; i < n; ++i) {
    db[i] = derivative(braf, theta, i);
    dk[i] = derivative(ketf, theta, i);
  }
  Vec bket(n), brak(n);  // <d_i bra|ket>, <bra|d_i ket>
  for (int i = 0; i < n; ++i) {
    bket[i] = inner_on(b, db[i], k.amplitudes);
    brak[i] = inner_on(b, b.amplitudes, dk[i]);
  }
  ConnectionField g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Vec ddb = second_derivative(braf, theta, i, j);
      const cxd dd_ket = inner_on(b, ddb, k.amplitudes);
      for (int kk = 0; kk < n; ++kk) {
        cxd v = inner_on(b, ddb, dk[kk]);
        v -= dd_ket * brak[kk];
        v -= bket[i] * inner_on(b, db[j], dk[kk]);
        v -= bket[j] * inner_on(b, db[i], dk[kk]);
        v += 2.0 * bket[i] * bket[j] * brak[kk];
        g.at(i, j, kk) = g.at(j, i, kk) = v;
      }
    }
  return g;
}

// Gauge-invariant connection of the "21" type:
// <d_k bra|dd ket> - (<d_k bra|ket><bra|dd ket> + sym<bra|d ket><d_k bra|d ket>)
// + 2 <d_k bra|ket><bra|d_i ket><bra|d_j ket>.
inline ConnectionField gauge_connection_21(const StateFamily& braf, const StateFamily& ketf,
                                           const RVec& theta) {
  const PureState b = evaluate(braf, theta);
  const PureState k = evaluate(ketf, theta);
  const int n = braf.n;
  std::vector<Vec> db(n), dk(n);
  for (int i = 0; i < n; ++i) {
    db[i] = derivative(braf, theta, i);
    dk[i] = derivative(ketf, theta, i);
  }
  Vec bket(n), brak(n);
  for (int i = 0; i < n; ++i) {
    bket[i] = inner_on(b, db[i], k.amplitudes);
    brak[i] = inner_on(b, b.amplitudes, dk[i]);
  }
  ConnectionField g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Vec ddk = second_derivative(ketf, theta, i, j);
      const cxd bra_dd = inner_on(b, b.amplitudes, ddk);
      for (int kk = 0; kk < n; ++kk) {
        cxd v = inner_on(b, db[kk], ddk);
        v -= bket[kk] * bra_dd;
        v -= brak[i] * inner_on(b, db[kk], dk[j]);
        v -= brak[j] * inner_on(b, db[kk], dk[i]);
        v += 2.0 * bket[kk] * brak[i] * brak[j];
        g.at(i, j, kk) = g.at(j, i, kk) = v;
      }
    }
  return g;
}

}  // namespace detail

// Gauge-invariant connection pair for the requested kind. For LR this is
// (Gamma^{LR}, Gamma^{RL}); for LL/RR the two members are mutual conjugates.
inline NhConnectionPair nh_connections(const StateFamily& left, const StateFamily& right,
                                       const RVec& theta, NhKind kind) {
  const auto bk = detail::pick_families(left, right, kind);
  {
    const PureState b = evaluate(*bk.bra, theta);
    const PureState k = evaluate(*bk.ket, theta);
    detail::require_kind_normalization(b, k, kind, theta);
  }
  NhConnectionPair pair;
  pair.first = detail::gauge_connection_12(*bk.bra, *bk.ket, theta);
  pair.second = detail::gauge_connection_21(*bk.bra, *bk.ket, theta);
  return pair;
}

// Residual of the left-right duality: applying (L <-> R, conjugate) to the
// Gamma^{LR}-type connection must reproduce Gamma^{RL}.
inline double lr_duality_residual(const StateFamily& left, const StateFamily& right,
                                  const RVec& theta) {
  const ConnectionField direct = detail::gauge_connection_21(left, right, theta);
  const ConnectionField swapped = detail::gauge_connection_12(right, left, theta);
  return ConnectionField::max_diff(direct, swapped.conjugate());
}

// QFI of the pointwise-normalized non-unitary orbit
// theta -> e^{-i H theta} Psi0 / N(theta):
//   QFI = 4 ( <H^dag H> - <H^dag><H> )  in the normalized state.
// For Hermitian H this is 4 Var(H) in Psi0, independent of theta.
inline RMat normalized_generator_qfi(const Mat& h, const Vec& psi0, double theta) {
  const double n0 = psi0.norm();
  if (std::abs(n0 - 1.0) > tol::eps_norm)
    throw Error(errc::normalization, "reference state must be unit norm");
  Vec u = expm(Mat(-I * theta * h)) * psi0;
  const double nn = u.norm();
  if (nn < 1e-150) throw Error(errc::numerical, "normalization underflow along the orbit");
  u /= nn;
  const Vec hu = h * u;
  const cxd mean_h = u.dot(hu);           // <H>
  const double mean_hh = std::real(hu.dot(hu));  // <H^dag H>
  RMat out(1, 1);
  out(0, 0) = 4.0 * (mean_hh - std::real(std::conj(mean_h) * mean_h));
  return out;
}

}  // namespace stategeom
