// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "srif/errors.hpp"
#include "srif/scene.hpp"

namespace srif::gaussian {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Zero- or nonzero-mean Gaussian state in ladder ordering
/// (a_1, a_1^dag, a_2, a_2^dag, ...). cov is the symmetrized covariance
/// Sigma_{mu,nu} = (1/2) <a~_mu a~_nu + a~_nu a~_mu>.
struct GaussianState {
  CVec mean;
  CMat cov;

  GaussianState() = default;
  GaussianState(CVec mean_, CMat cov_)
      : mean(std::move(mean_)), cov(std::move(cov_)) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size() ||
        mean.size() % 2 != 0)
      throw DimensionError("GaussianState: mean/cov shape mismatch");
  }

  int n_modes() const { return static_cast<int>(mean.size()) / 2; }

  static GaussianState vacuum(int modes) {
    GaussianState st;
    st.mean = CVec::Zero(2 * modes);
    st.cov = CMat::Zero(2 * modes, 2 * modes);
    for (int i = 0; i < modes; ++i) {
      st.cov(2 * i, 2 * i + 1) = 0.5;
      st.cov(2 * i + 1, 2 * i) = 0.5;
    }
    return st;
  }
};

/// Ladder-index commutator matrix, one [[0,1],[-1,0]] block per mode.
inline CMat symplectic_form(int modes) {
  CMat omega = CMat::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

/// Permutation that swaps annihilation and creation indices per mode.
inline Eigen::PermutationMatrix<Eigen::Dynamic> conjugation_swap(int modes) {
  Eigen::VectorXi idx(2 * modes);
  for (int i = 0; i < modes; ++i) {
    idx(2 * i) = 2 * i + 1;
    idx(2 * i + 1) = 2 * i;
  }
  return Eigen::PermutationMatrix<Eigen::Dynamic>(idx);
}

inline bool is_symmetric(const CMat& m, double tol = 1e-12) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Entry pairing (a_i, a_j^dag) must be the conjugate of (a_i^dag, a_j).
inline bool conjugation_ok(const GaussianState& st, double tol = 1e-12) {
  const auto swap = conjugation_swap(st.n_modes());
  const CMat swapped = swap.transpose() * st.cov * swap;
  return (swapped - st.cov.conjugate()).cwiseAbs().maxCoeff() <= tol;
}

/// Uncertainty-principle check. The Hermitian realization of
/// Sigma + Omega/2 >= 0 in ladder ordering is K (Sigma + Omega/2)^T with
/// K the annihilation/creation swap; its spectrum must be >= -1e-10.
inline double physicality_floor(const GaussianState& st) {
  const int n = st.n_modes();
  const CMat g = st.cov + 0.5 * symplectic_form(n);
  const auto swap = conjugation_swap(n);
  const CMat herm = swap * g.transpose();
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  return es.eigenvalues().minCoeff();
}

inline bool physicality_check(const GaussianState& st, double tol = 1e-10) {
  return physicality_floor(st) >= -tol;
}

/// Mean photon number per mode, <a_i^dag a_i> = Sigma(a_i, a_i^dag) - 1/2.
inline Eigen::VectorXd mode_occupations(const GaussianState& st) {
  Eigen::VectorXd occ(st.n_modes());
  for (int i = 0; i < st.n_modes(); ++i)
    occ(i) = st.cov(2 * i, 2 * i + 1).real() - 0.5;
  return occ;
}

/// Adds a tiny thermal occupation to every mode. Used by callers that hit
/// the singular-moment error on exactly pure modes.
inline GaussianState with_thermal_floor(GaussianState st, double n_floor) {
  for (int i = 0; i < st.n_modes(); ++i) {
    st.cov(2 * i, 2 * i + 1) += n_floor;
    st.cov(2 * i + 1, 2 * i) += n_floor;
  }
  return st;
}

/// Passive linear-optics transform d = U a on annihilation operators.
struct ModeTransform {
  CMat u;

  explicit ModeTransform(CMat u_) : u(std::move(u_)) {
    if (u.rows() != u.cols())
      throw DimensionError("ModeTransform: U must be square");
    const CMat gram = u.adjoint() * u;
    if ((gram - CMat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() >
        1e-12)
      throw std::invalid_argument("ModeTransform: U is not unitary");
  }

  int n_modes() const { return static_cast<int>(u.rows()); }

  /// 2n x 2n action on the ladder vector: annihilators get U, creators U*.
  CMat ladder() const {
    const int n = n_modes();
    CMat s = CMat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        s(2 * i, 2 * j) = u(i, j);
        s(2 * i + 1, 2 * j + 1) = std::conj(u(i, j));
      }
    return s;
  }

  ModeTransform inverse() const { return ModeTransform(CMat(u.adjoint())); }

  /// 50:50 beam splitter with phase delay applied to the second input arm:
  /// d1 = (a1 + e^{i delta} a2)/sqrt(2), d2 = (a1 - e^{i delta} a2)/sqrt(2).
  static ModeTransform beam_splitter(double delta) {
    const Cplx ph = std::exp(Cplx(0.0, delta));
    CMat u(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    u << r, r * ph, r, -r * ph;
    return ModeTransform(u);
  }
};

inline GaussianState apply_transform(const GaussianState& st,
                                     const ModeTransform& t) {
  if (t.n_modes() != st.n_modes())
    throw DimensionError("apply_transform: mode count mismatch");
  const CMat s = t.ladder();
  return GaussianState(s * st.mean, s * st.cov * s.transpose());
}

/// State received by the two telescope modes from two incoherent thermal
/// sources: zero mean, diagonal blocks p = 2*eta*nbar + 1/2 and coherence
/// q = eta*nbar*(e^{i phi1} + e^{i phi2}) at the (a_1, a_2^dag) pairing.
inline GaussianState two_telescope_state(const scene::SceneParams& sc) {
  sc.validate();
  const auto ph = scene::phases_from_positions(sc);
  const double eps = sc.strength();
  const double p = 2.0 * eps + 0.5;
  const Cplx q =
      eps * (std::exp(Cplx(0.0, ph.phi1)) + std::exp(Cplx(0.0, ph.phi2)));

  CMat cov = CMat::Zero(4, 4);
  cov(0, 1) = cov(1, 0) = p;
  cov(2, 3) = cov(3, 2) = p;
  cov(0, 3) = cov(3, 0) = q;
  cov(1, 2) = cov(2, 1) = std::conj(q);
  return GaussianState(CVec::Zero(4), cov);
}

}  // namespace srif::gaussian
