// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace srif::scene {

/// Observation geometry: two thermal point sources at transverse positions
/// x1, x2 seen by a two-telescope baseline. Positions are encoded in the
/// arrival phases phi_i = k*B*sin(tilt) + k*B*cos(tilt)*x_i/s0; the single
/// scale u0 = k*B*cos(tilt)/s0 carries all units downstream. With the
/// reduced convention k*B/s0 = 1 and tilt = 0, Fisher informations come out
/// in units of k^2 B^2 / s0^2.
struct SceneParams {
  double k = 1.0;     ///< wavevector [rad/length]
  double B = 1.0;     ///< baseline length
  double s0 = 1.0;    ///< longitudinal source distance
  double tilt = 0.0;  ///< image-plane angle [rad]
  double eta = 0.5;   ///< per-telescope transmissivity, in [0, 1/2]
  double nbar = 0.0;  ///< mean photon number per source
  double x1 = 0.0;    ///< transverse position of source 1
  double x2 = 0.0;    ///< transverse position of source 2

  SceneParams() = default;

  SceneParams(double k_, double B_, double s0_, double tilt_, double eta_,
              double nbar_, double x1_, double x2_)
      : k(k_), B(B_), s0(s0_), tilt(tilt_), eta(eta_), nbar(nbar_),
        x1(x1_), x2(x2_) {
    validate();
  }

  /// Reduced-unit scene: u0 = k*B*cos(tilt)/s0 set directly, positions given
  /// as centroid and separation. eta is fixed at its maximum 1/2 and nbar
  /// chosen so that eta*nbar equals the requested effective strength.
  static SceneParams reduced(double eps, double centroid, double separation,
                             double u0 = 1.0) {
    if (eps < 0.0) throw std::invalid_argument("effective strength < 0");
    SceneParams s;
    s.k = u0;
    s.B = 1.0;
    s.s0 = 1.0;
    s.tilt = 0.0;
    s.eta = 0.5;
    s.nbar = 2.0 * eps;
    s.x1 = centroid + 0.5 * separation;
    s.x2 = centroid - 0.5 * separation;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(eta >= 0.0 && eta <= 0.5))
      throw std::invalid_argument("eta must lie in [0, 1/2]");
    if (!(nbar >= 0.0)) throw std::invalid_argument("nbar must be >= 0");
    if (!(k > 0.0 && B > 0.0 && s0 > 0.0))
      throw std::invalid_argument("k, B, s0 must be > 0");
  }

  /// Effective source strength eta*nbar, the single coupling used everywhere.
  double strength() const { return eta * nbar; }

  /// Phase-per-position scale factor k*B*cos(tilt)/s0.
  double u0() const { return k * B * std::cos(tilt) / s0; }

  double centroid() const { return 0.5 * (x1 + x2); }
  double separation() const { return x1 - x2; }

  /// True when both sources sit inside the small-angle validity regime
  /// |x_i|/s0 <= 0.01. Callers should warn (not fail) outside it.
  bool paraxial_ok() const {
    return std::abs(x1) / s0 <= 0.01 && std::abs(x2) / s0 <= 0.01;
  }

  SceneParams with_positions(double centroid, double separation) const {
    SceneParams s = *this;
    s.x1 = centroid + 0.5 * separation;
    s.x2 = centroid - 0.5 * separation;
    return s;
  }
};

/// Arrival phases of the two sources. Kept unwrapped: dphi and the centroid
/// phase are exact linear functions of phi1, phi2.
struct PhasePair {
  double phi1 = 0.0;
  double phi2 = 0.0;

  double dphi() const { return phi1 - phi2; }
  double centroid_phase() const { return 0.5 * (phi1 + phi2); }
};

/// First-order phase model phi_i = k*B*sin(tilt) + u0*x_i. Higher orders in
/// x_i/s0 are deliberately excluded; this linearization is the contract.
inline PhasePair phases_from_positions(const SceneParams& s) {
  const double common = s.k * s.B * std::sin(s.tilt);
  const double u0 = s.u0();
  return PhasePair{common + u0 * s.x1, common + u0 * s.x2};
}

/// Inverse of the (centroid, separation) parametrization.
inline std::pair<double, double> positions_from_centroid_separation(
    double theta1, double theta2) {
  return {theta1 + 0.5 * theta2, theta1 - 0.5 * theta2};
}

/// Phase separation phi1 - phi2 = u0 * theta2.
inline double phase_separation(const SceneParams& s) {
  return s.u0() * s.separation();
}

/// Centroid phase (phi1 + phi2)/2 = k*B*sin(tilt) + u0 * theta1.
inline double centroid_phase(const SceneParams& s) {
  return phases_from_positions(s).centroid_phase();
}

}  // namespace srif::scene
