// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srif/errors.hpp"
#include "srif/gaussian.hpp"
#include "srif/quadrature.hpp"
#include "srif/scene.hpp"

namespace srif::povm {

using gaussian::Cplx;

/// Bose-Einstein photon-number law of a thermal mode with mean x.
inline double bose_einstein(double x, int j) {
  if (x <= 0.0) return j == 0 ? 1.0 : 0.0;
  return std::pow(x, j) / std::pow(1.0 + x, j + 1);
}

/// Controls for the coherent-amplitude quadrature and the FI derivative.
struct IntegrationConfig {
  double b = 0.0;          ///< amplitude cutoff; 0 selects the tail-bound default
  int radial_nodes = 64;   ///< Gauss-Legendre nodes per amplitude axis
  int phase_nodes = 128;   ///< periodic trapezoid nodes per phase axis
  double fd_step = 1e-5;   ///< central-difference step for dP/dtheta2 [phase units]
  double prob_floor = 1e-15;  ///< relative floor on probabilities entering FI sums
  bool check_convergence = false;  ///< re-run with doubled radial nodes and compare

  void validate() const {
    if (radial_nodes < 8 || phase_nodes < 8)
      throw std::invalid_argument("IntegrationConfig: node counts >= 8");
    if (!(fd_step > 0.0 && fd_step <= 1e-2))
      throw std::invalid_argument("IntegrationConfig: fd_step in (0, 1e-2]");
    if (prob_floor < 0.0)
      throw std::invalid_argument("IntegrationConfig: prob_floor >= 0");
    if (b < 0.0) throw std::invalid_argument("IntegrationConfig: b >= 0");
  }

  /// Cutoff large enough that the discarded coherent-amplitude tail mass is
  /// ~1e-12, floored at 0.5.
  double resolved_cutoff(double eps) const {
    if (b > 0.0) return b;
    const double tail = 1e-12;
    return std::max(0.5, std::sqrt(std::max(eps, 0.0) * std::log(1.0 / tail)));
  }
};

/// Joint photon-count distribution over a truncation window, plus the mass
/// that fell outside it.
struct PhotonCountDistribution {
  Eigen::MatrixXd probs;  ///< (Mmax+1) x (Nmax+1)
  double tail_mass = 0.0;
  scene::SceneParams scene_meta;
  double delta = 0.0;
  std::string method;
  std::optional<Eigen::MatrixXd> std_error;  ///< set for empirical estimates

  int mmax() const { return static_cast<int>(probs.rows()) - 1; }
  int nmax() const { return static_cast<int>(probs.cols()) - 1; }
  double p(int m, int n) const { return probs(m, n); }
  double total() const { return probs.sum(); }
};

/// Mean occupations of the beam-splitter output modes for delay delta:
/// n_{d1,2} = 2 eta nbar (1 +- cos(dphi/2) cos c), c the misalignment.
inline std::pair<double, double> d_mode_occupations(
    const scene::SceneParams& sc, double delta) {
  const auto ph = scene::phases_from_positions(sc);
  const double eps = sc.strength();
  const double c = ph.centroid_phase() - delta;
  const double mod = std::cos(0.5 * ph.dphi()) * std::cos(c);
  return {2.0 * eps * (1.0 + mod), 2.0 * eps * (1.0 - mod)};
}

/// Outcome distribution of the aligned measurement (delta at the centroid
/// phase). The output modes are then two uncorrelated thermal modes, so
/// P(m,n) is an exact product of Bose-Einstein laws; the window tail is
/// accounted analytically.
inline PhotonCountDistribution aligned_pmn(const scene::SceneParams& sc,
                                           int mmax, int nmax) {
  if (mmax < 0 || nmax < 0)
    throw std::invalid_argument("aligned_pmn: window bounds >= 0");
  const auto ph = scene::phases_from_positions(sc);
  const auto [n1, n2] = d_mode_occupations(sc, ph.centroid_phase());

  PhotonCountDistribution dist;
  dist.probs.resize(mmax + 1, nmax + 1);
  for (int m = 0; m <= mmax; ++m)
    for (int n = 0; n <= nmax; ++n)
      dist.probs(m, n) = bose_einstein(n1, m) * bose_einstein(n2, n);
  const double kept1 =
      n1 > 0.0 ? 1.0 - std::pow(n1 / (1.0 + n1), mmax + 1) : 1.0;
  const double kept2 =
      n2 > 0.0 ? 1.0 - std::pow(n2 / (1.0 + n2), nmax + 1) : 1.0;
  dist.tail_mass = 1.0 - kept1 * kept2;
  dist.scene_meta = sc;
  dist.delta = ph.centroid_phase();
  dist.method = "aligned-product";
  return dist;
}

namespace detail {

/// One pass of the coherent-mixture quadrature. The conditional outcome law
/// given amplitudes (alpha1, alpha2) is a product of Poissonians in the
/// transformed mode intensities; the integrand depends on the amplitude
/// phases only through their difference, so one phase integral is exact
/// (factor 2pi) and the other is a periodic trapezoid sum.
inline Eigen::MatrixXd misaligned_grid(const scene::SceneParams& sc,
                                       double delta, double cutoff,
                                       int radial_nodes, int phase_nodes,
                                       int mmax, int nmax) {
  const auto ph = scene::phases_from_positions(sc);
  const double eps = sc.strength();
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(mmax + 1, nmax + 1);
  if (eps <= 0.0) {
    probs(0, 0) = 1.0;
    return probs;
  }

  const auto radial = quad::gauss_legendre(radial_nodes, 0.0, cutoff);

  std::vector<double> inv_fact_m(mmax + 1), inv_fact_n(nmax + 1);
  inv_fact_m[0] = 1.0;
  for (int m = 1; m <= mmax; ++m) inv_fact_m[m] = inv_fact_m[m - 1] / m;
  inv_fact_n[0] = 1.0;
  for (int n = 1; n <= nmax; ++n) inv_fact_n[n] = inv_fact_n[n - 1] / n;

  const Cplx ed = std::exp(Cplx(0.0, delta));
  const Cplx e1c = std::exp(Cplx(0.0, -ph.phi1));
  const Cplx e2c = std::exp(Cplx(0.0, -ph.phi2));

  std::vector<Cplx> echi(phase_nodes);
  for (int j = 0; j < phase_nodes; ++j)
    echi[j] = std::exp(Cplx(0.0, 2.0 * M_PI * j / phase_nodes));

  Eigen::MatrixXd acc(mmax + 1, nmax + 1);

  for (int i1 = 0; i1 < radial_nodes; ++i1) {
    const double r1 = radial.nodes[i1];
    for (int i2 = 0; i2 < radial_nodes; ++i2) {
      const double r2 = radial.nodes[i2];
      const double gauss = std::exp(-(r1 * r1 + r2 * r2) / eps);
      const double wr =
          radial.weights[i1] * radial.weights[i2] * r1 * r2 * gauss;
      if (wr < 1e-300) continue;

      acc.setZero();
      for (int j = 0; j < phase_nodes; ++j) {
        const Cplx a1 = r1 * echi[j] + r2;
        const Cplx a2 = r1 * echi[j] * e1c + r2 * e2c;
        const Cplx b1 = (a1 + ed * a2) / std::sqrt(2.0);
        const Cplx b2 = (a1 - ed * a2) / std::sqrt(2.0);
        const double x = std::norm(b1);
        const double y = std::norm(b2);
        const double base = std::exp(-x - y);

        double xm = 1.0;
        for (int m = 0; m <= mmax; ++m) {
          double yn = xm * base;
          for (int n = 0; n <= nmax; ++n) {
            acc(m, n) += yn * inv_fact_m[m] * inv_fact_n[n];
            yn *= y;
          }
          xm *= x;
        }
      }
      probs += wr * acc;
    }
  }
  probs *= 4.0 / (eps * eps * phase_nodes);
  return probs;
}

}  // namespace detail

/// Outcome distribution for an arbitrary beam-splitter delay, by quadrature
/// over the thermal coherent-amplitude mixture. Reduces to aligned_pmn when
/// the delay hits the centroid phase.
inline PhotonCountDistribution misaligned_pmn(const scene::SceneParams& sc,
                                              double delta,
                                              const IntegrationConfig& cfg,
                                              int mmax, int nmax) {
  if (mmax < 0 || nmax < 0)
    throw std::invalid_argument("misaligned_pmn: window bounds >= 0");
  cfg.validate();
  const double cutoff = cfg.resolved_cutoff(sc.strength());

  PhotonCountDistribution dist;
  dist.probs = detail::misaligned_grid(sc, delta, cutoff, cfg.radial_nodes,
                                       cfg.phase_nodes, mmax, nmax);
  if (cfg.check_convergence) {
    const Eigen::MatrixXd fine =
        detail::misaligned_grid(sc, delta, cutoff, 2 * cfg.radial_nodes,
                                cfg.phase_nodes, mmax, nmax);
    for (int m = 0; m <= mmax; ++m)
      for (int n = 0; n <= nmax; ++n) {
        const double ref = std::max(std::abs(fine(m, n)), 1e-300);
        if (std::abs(fine(m, n) - dist.probs(m, n)) / ref > 1e-6)
          throw ConvergenceError(
              "misaligned_pmn: doubled radial nodes moved P(" +
              std::to_string(m) + "," + std::to_string(n) +
              ") by more than 1e-6 relative");
      }
  }
  dist.tail_mass = 1.0 - dist.probs.sum();
  dist.scene_meta = sc;
  dist.delta = delta;
  dist.method = "coherent-mixture-quadrature";
  return dist;
}

/// How the FI treats events outside the detector window: dropped outright
/// (no renormalization), or lumped into a single overflow outcome.
enum class TruncationMode { discard, overflow };

using DistributionFamily =
    std::function<PhotonCountDistribution(double /*theta2*/)>;

/// Classical Fisher information of a photon-counting family at separation
/// theta2: FI = sum (dP/dtheta2)^2 / P over the retained outcomes, with the
/// derivative by central differences of cfg.fd_step phase units (u0 converts
/// to separation units). Outcomes below the relative probability floor are
/// skipped.
inline double classical_fi(const DistributionFamily& dist_at, double theta2,
                           const IntegrationConfig& cfg, double u0 = 1.0,
                           TruncationMode mode = TruncationMode::discard) {
  cfg.validate();
  const double h = cfg.fd_step / u0;
  const PhotonCountDistribution center = dist_at(theta2);
  const PhotonCountDistribution plus = dist_at(theta2 + h);
  const PhotonCountDistribution minus = dist_at(theta2 - h);
  if (plus.probs.rows() != center.probs.rows() ||
      plus.probs.cols() != center.probs.cols())
    throw DimensionError("classical_fi: window changed across evaluations");

  const double floor = cfg.prob_floor * center.total();
  double fi = 0.0;
  for (int m = 0; m < center.probs.rows(); ++m)
    for (int n = 0; n < center.probs.cols(); ++n) {
      const double p0 = center.probs(m, n);
      if (p0 < floor || p0 <= 0.0) continue;
      const double dp = (plus.probs(m, n) - minus.probs(m, n)) / (2.0 * h);
      fi += dp * dp / p0;
    }
  if (mode == TruncationMode::overflow && center.tail_mass > floor) {
    const double dp = (plus.tail_mass - minus.tail_mass) / (2.0 * h);
    fi += dp * dp / center.tail_mass;
  }
  return fi;
}

/// Family over theta2 for the aligned measurement; the delay tracks the
/// (fixed) centroid, which does not move with theta2.
inline DistributionFamily aligned_family(const scene::SceneParams& base,
                                         int mmax, int nmax) {
  return [base, mmax, nmax](double theta2) {
    return aligned_pmn(base.with_positions(base.centroid(), theta2), mmax,
                       nmax);
  };
}

/// Family over theta2 at a fixed hardware delay (misaligned in general).
inline DistributionFamily misaligned_family(const scene::SceneParams& base,
                                            double delta,
                                            const IntegrationConfig& cfg,
                                            int mmax, int nmax) {
  return [base, delta, cfg, mmax, nmax](double theta2) {
    return misaligned_pmn(base.with_positions(base.centroid(), theta2), delta,
                          cfg, mmax, nmax);
  };
}

inline double aligned_fi(const scene::SceneParams& sc, int mmax, int nmax,
                         const IntegrationConfig& cfg,
                         TruncationMode mode = TruncationMode::discard) {
  return classical_fi(aligned_family(sc, mmax, nmax), sc.separation(), cfg,
                      sc.u0(), mode);
}

inline double misaligned_fi(const scene::SceneParams& sc, double delta,
                            const IntegrationConfig& cfg, int mmax = 3,
                            int nmax = 3,
                            TruncationMode mode = TruncationMode::discard) {
  return classical_fi(misaligned_family(sc, delta, cfg, mmax, nmax),
                      sc.separation(), cfg, sc.u0(), mode);
}

/// Window large enough that the aligned tail mass stays below `tail`.
inline std::pair<int, int> aligned_window_for_tail(
    const scene::SceneParams& sc, double tail) {
  const auto [n1, n2] =
      d_mode_occupations(sc, scene::centroid_phase(sc));
  const auto bound = [tail](double n) {
    if (n <= 0.0) return 0;
    const int m = static_cast<int>(
        std::ceil(std::log(0.5 * tail) / std::log(n / (1.0 + n))));
    return std::min(512, std::max(1, m));
  };
  return {bound(n1), bound(n2)};
}

struct ScanRow {
  double x = 0.0;
  double fi = 0.0;
};

/// FI of the aligned measurement truncated at (mmax, nmax), over a list of
/// separations.
inline std::vector<ScanRow> truncated_fi_scan(
    const scene::SceneParams& base, const std::vector<double>& theta2_values,
    int mmax, int nmax, const IntegrationConfig& cfg,
    TruncationMode mode = TruncationMode::discard) {
  std::vector<ScanRow> rows;
  rows.reserve(theta2_values.size());
  for (double t2 : theta2_values) {
    const auto sc = base.with_positions(base.centroid(), t2);
    rows.push_back({t2, aligned_fi(sc, mmax, nmax, cfg, mode)});
  }
  return rows;
}

/// FI versus separation at fixed misalignment c (delay pinned at the base
/// scene's centroid phase minus c).
inline std::vector<ScanRow> misalignment_scan_theta2(
    const scene::SceneParams& base, double c,
    const std::vector<double>& theta2_values, const IntegrationConfig& cfg,
    int mmax = 3, int nmax = 3) {
  const double delta = scene::centroid_phase(base) - c;
  std::vector<ScanRow> rows;
  rows.reserve(theta2_values.size());
  for (double t2 : theta2_values) {
    const auto sc = base.with_positions(base.centroid(), t2);
    rows.push_back({t2, misaligned_fi(sc, delta, cfg, mmax, nmax)});
  }
  return rows;
}

/// FI versus misalignment c at fixed separation.
inline std::vector<ScanRow> misalignment_scan_c(
    const scene::SceneParams& sc, const std::vector<double>& c_values,
    const IntegrationConfig& cfg, int mmax = 3, int nmax = 3) {
  const double psi = scene::centroid_phase(sc);
  std::vector<ScanRow> rows;
  rows.reserve(c_values.size());
  for (double c : c_values)
    rows.push_back({c, misaligned_fi(sc, psi - c, cfg, mmax, nmax)});
  return rows;
}

}  // namespace srif::povm
