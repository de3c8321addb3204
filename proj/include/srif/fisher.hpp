// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

#include "srif/errors.hpp"
#include "srif/gaussian.hpp"
#include "srif/scene.hpp"

namespace srif::fisher {

using gaussian::CMat;
using gaussian::Cplx;
using gaussian::CVec;
using gaussian::GaussianState;

inline constexpr double two_pi = 6.283185307179586476925286766559;

enum class Parameter { centroid, separation };

/// Hermitian observable that is quadratic in the ladder operators:
/// L = sum_{gk} coeff_{gk} * (1/2)(a~_g a~_k + a~_k a~_g) + constant,
/// with coeff symmetric. Conjugate pairing of coeff under the
/// annihilation/creation swap keeps expectation values real.
struct QuadraticObservable {
  CMat coeff;       ///< symmetric (2n x 2n) over symmetrized ladder products
  double constant = 0.0;

  int n_modes() const { return static_cast<int>(coeff.rows()) / 2; }

  /// <L> on a Gaussian state; asserts nothing, returns the real part
  /// (imaginary residue is a diagnostic for broken conjugate pairing).
  Cplx expectation_raw(const GaussianState& st) const {
    const CMat second =
        st.cov + 0.5 * (st.mean * st.mean.transpose() +
                        (st.mean * st.mean.transpose()).transpose());
    return (coeff.array() * second.array()).sum() + constant;
  }

  double expectation(const GaussianState& st) const {
    return expectation_raw(st).real();
  }

  /// Rewrites the observable in the output basis of a passive transform
  /// d = U a. The coefficient matrix picks up S^{-T} . S^{-1} with S the
  /// ladder-space action of U.
  QuadraticObservable transformed(const gaussian::ModeTransform& t) const {
    const CMat sinv = t.inverse().ladder();
    return QuadraticObservable{sinv.transpose() * coeff * sinv, constant};
  }
};

/// Fisher-information matrix over the estimation parameters.
struct QfiMatrix {
  Eigen::MatrixXd values;

  double centroid() const { return values(0, 0); }
  double separation() const { return values(1, 1); }
  double cross() const { return values(0, 1); }
};

namespace detail {

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVec vec_rowmajor(const CMat& m) {
  CVec v(m.size());
  const Eigen::Index d = m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = m(i, j);
  return v;
}

inline CMat unvec_rowmajor(const CVec& v, Eigen::Index d) {
  CMat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

}  // namespace detail

/// Second-moment superoperator M = Sigma (x) Sigma + (1/4) Omega (x) Omega
/// acting on vectorized perturbations of the covariance. Singular exactly
/// when some mode is pure (vacuum), in which case solves must fail loudly.
inline CMat moment_matrix(const GaussianState& st) {
  const CMat omega = gaussian::symplectic_form(st.n_modes());
  return detail::kron(st.cov, st.cov) + 0.25 * detail::kron(omega, omega);
}

namespace detail {

struct MomentSolver {
  Eigen::FullPivLU<CMat> lu;
  Eigen::Index dim;

  explicit MomentSolver(const GaussianState& st)
      : lu(moment_matrix(st)), dim(st.cov.rows()) {
    if (!lu.isInvertible())
      throw SingularMomentError(
          "moment matrix is singular: a mode is exactly pure; add a thermal "
          "floor (e.g. with_thermal_floor(state, 1e-12)) and retry");
  }

  CMat solve(const CMat& rhs) const {
    return unvec_rowmajor(lu.solve(vec_rowmajor(rhs)), dim);
  }
};

}  // namespace detail

using StateFamily = std::function<GaussianState(const Eigen::VectorXd&)>;

/// Quantum Fisher information of a parametrized Gaussian family, from the
/// closed-form expression in the first and second moments:
///   F_ij = (1/2) <vec d_j Sigma, M^{-1} vec d_i Sigma>
///          + <d_j lambda, Sigma^{-1} d_i lambda>,
/// with derivatives taken by central differences of width `step` and the
/// moment systems solved exactly (no explicit inverse, no regularization).
inline QfiMatrix qfi_numeric(const StateFamily& family,
                             const Eigen::VectorXd& params,
                             double step = 1e-5) {
  if (step <= 0.0) throw std::invalid_argument("qfi_numeric: step > 0");
  const int np = static_cast<int>(params.size());
  const GaussianState center = family(params);
  const detail::MomentSolver solver(center);

  std::vector<CMat> dcov(np);
  std::vector<CVec> dmean(np);
  for (int i = 0; i < np; ++i) {
    Eigen::VectorXd up = params, dn = params;
    up(i) += step;
    dn(i) -= step;
    const GaussianState plus = family(up);
    const GaussianState minus = family(dn);
    dcov[i] = (plus.cov - minus.cov) / (2.0 * step);
    dmean[i] = (plus.mean - minus.mean) / (2.0 * step);
  }

  std::vector<CMat> solved(np);
  for (int i = 0; i < np; ++i) solved[i] = solver.solve(dcov[i]);

  Eigen::PartialPivLU<CMat> cov_lu(center.cov);

  Eigen::MatrixXd f(np, np);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) {
      Cplx val = 0.5 * (dcov[j].array() * solved[i].array()).sum();
      if (dmean[i].cwiseAbs().maxCoeff() > 0.0 ||
          dmean[j].cwiseAbs().maxCoeff() > 0.0) {
        val += (dmean[j].transpose() * cov_lu.solve(dmean[i])).value();
      }
      f(i, j) = val.real();
    }
  return QfiMatrix{0.5 * (f + f.transpose())};
}

/// SLD of a Gaussian family at a given covariance derivative:
/// L = sum b_{gk} (a~_g a~_k - Sigma_{gk}) with b = (1/2) M^{-1} dSigma.
/// Tr(rho L) = 0 holds by construction.
inline QuadraticObservable sld_numeric(const GaussianState& st,
                                       const CMat& dcov) {
  if (dcov.rows() != st.cov.rows() || dcov.cols() != st.cov.cols())
    throw DimensionError("sld_numeric: dSigma shape mismatch");
  const detail::MomentSolver solver(st);
  const CMat b = 0.5 * solver.solve(dcov);
  const double constant = -(b.array() * st.cov.array()).sum().real();
  return QuadraticObservable{b, constant};
}

// ---------------------------------------------------------------------------
// Closed forms for the two-telescope scene.
// ---------------------------------------------------------------------------

/// QFI for the source separation. Finite for all separations; tends to
/// u0^2 * eta*nbar as the separation goes to zero (no resolution limit).
inline double qfi_separation_closed(const scene::SceneParams& sc) {
  const double u0 = sc.u0();
  const double eps = sc.strength();
  const double dphi = scene::phase_separation(sc);
  if (std::abs(dphi) < 1e-6) return u0 * u0 * eps;
  const double c = std::cos(dphi);
  const double num = eps * (1.0 + 3.0 * eps + eps * c);
  const double den = -1.0 - 2.0 * eps * (2.0 + eps) + 2.0 * eps * eps * c;
  return -u0 * u0 * num / den;
}

/// QFI for the source centroid; tends to 4 * u0^2 * eta*nbar at zero
/// separation.
inline double qfi_centroid_closed(const scene::SceneParams& sc) {
  const double u0 = sc.u0();
  const double eps = sc.strength();
  const double dphi = scene::phase_separation(sc);
  if (std::abs(dphi) < 1e-6) return 4.0 * u0 * u0 * eps;
  const double c = std::cos(dphi);
  const double num = eps * (1.0 + c);
  const double den = -1.0 - eps + eps * c;
  return -2.0 * u0 * u0 * num / den;
}

/// Coefficients of the separation SLD,
/// L = 2 l1 (a1^dag a1 + a2^dag a2) + 2 l2 a1 a2^dag + 2 l2* a1^dag a2 + C.
struct SeparationSldCoeffs {
  double l1 = 0.0;
  Cplx l2{0.0, 0.0};
  double constant = 0.0;  ///< C, fixed so that Tr(rho L) = 0
};

/// Coefficients of the centroid SLD,
/// L = 2 l3 a1 a2^dag + 2 l3* a1^dag a2 + C.
struct CentroidSldCoeffs {
  Cplx l3{0.0, 0.0};
  double constant = 0.0;
};

namespace detail {

inline void require_nondegenerate_separation(double dphi) {
  if (std::abs(std::remainder(dphi, two_pi)) < 1e-8)
    throw CoefficientSingularity(
        "separation SLD coefficients degenerate at dphi = 0 mod 2pi; the QFI "
        "itself stays finite, use qfi_separation_closed for the limit");
}

}  // namespace detail

inline SeparationSldCoeffs sld_separation_coeffs(
    const scene::SceneParams& sc) {
  const auto ph = scene::phases_from_positions(sc);
  const double dphi = ph.dphi();
  detail::require_nondegenerate_separation(dphi);
  const double u0 = sc.u0();
  const double eps = sc.strength();
  const double c = std::cos(dphi);
  const double den = -1.0 - 2.0 * eps * (2.0 + eps) + 2.0 * eps * eps * c;

  SeparationSldCoeffs out;
  out.l1 = -u0 * (1.0 + 4.0 * eps) / std::tan(0.5 * dphi) / (4.0 * den);
  out.l2 = u0 * std::exp(Cplx(0.0, -ph.centroid_phase())) *
           (1.0 + 3.0 * eps + eps * c) / std::sin(0.5 * dphi) / (4.0 * den);
  const Cplx e1 = std::exp(Cplx(0.0, ph.phi1));
  const Cplx e2 = std::exp(Cplx(0.0, ph.phi2));
  out.constant = -eps * (8.0 * out.l1 + 4.0 * (out.l2 * (e1 + e2)).real());
  return out;
}

inline CentroidSldCoeffs sld_centroid_coeffs(const scene::SceneParams& sc) {
  const auto ph = scene::phases_from_positions(sc);
  const double u0 = sc.u0();
  const double eps = sc.strength();
  const double den =
      -4.0 - 4.0 * eps + 4.0 * eps * std::cos(ph.dphi());

  CentroidSldCoeffs out;
  const Cplx e1c = std::exp(Cplx(0.0, -ph.phi1));
  const Cplx e2c = std::exp(Cplx(0.0, -ph.phi2));
  out.l3 = Cplx(0.0, 1.0) * u0 * (e1c + e2c) / den;
  out.constant = -4.0 * eps * (out.l3 * std::conj(e1c + e2c)).real();
  return out;
}

/// Assembles the separation SLD as a QuadraticObservable (canonical
/// symmetric-coefficient form; the number-operator reordering shifts the
/// constant by -2 l1).
inline QuadraticObservable assemble_separation_sld(
    const scene::SceneParams& sc) {
  const auto co = sld_separation_coeffs(sc);
  CMat b = CMat::Zero(4, 4);
  b(0, 1) = b(1, 0) = co.l1;
  b(2, 3) = b(3, 2) = co.l1;
  b(0, 3) = b(3, 0) = co.l2;
  b(1, 2) = b(2, 1) = std::conj(co.l2);
  return QuadraticObservable{b, co.constant - 2.0 * co.l1};
}

inline QuadraticObservable assemble_centroid_sld(
    const scene::SceneParams& sc) {
  const auto co = sld_centroid_coeffs(sc);
  CMat b = CMat::Zero(4, 4);
  b(0, 3) = b(3, 0) = co.l3;
  b(1, 2) = b(2, 1) = std::conj(co.l3);
  return QuadraticObservable{b, co.constant};
}

/// Beam-splitter delay that diagonalizes the SLD in the output number
/// basis: (phi1+phi2)/2 for separation, (phi1+phi2)/2 - pi/2 for centroid.
/// Reduced to [0, 2pi).
inline double optimal_delay(const scene::SceneParams& sc, Parameter which) {
  const double psi = scene::centroid_phase(sc);
  double delta = which == Parameter::separation ? psi : psi - M_PI / 2.0;
  delta = std::fmod(delta, two_pi);
  if (delta < 0.0) delta += two_pi;
  return delta;
}

/// Two-telescope state family over (centroid, separation), for feeding
/// qfi_numeric and the scan drivers.
inline StateFamily two_telescope_family(const scene::SceneParams& base) {
  return [base](const Eigen::VectorXd& p) {
    return gaussian::two_telescope_state(base.with_positions(p(0), p(1)));
  };
}

/// QFI matrix over (centroid, separation) by the generic numeric route.
inline QfiMatrix qfi_two_telescope_numeric(const scene::SceneParams& sc,
                                           double step = 1e-5) {
  Eigen::VectorXd p(2);
  p << sc.centroid(), sc.separation();
  return qfi_numeric(two_telescope_family(sc), p, step);
}

}  // namespace srif::fisher
