// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "srif/fisher.hpp"
#include "srif/povm.hpp"
#include "srif/scene.hpp"

namespace srif::limits {

using gaussian::Cplx;

// ---------------------------------------------------------------------------
// Weak-source limit: the received state carries at most one photon and the
// closed forms below are exact in that subspace.
// ---------------------------------------------------------------------------

/// Weights of the two single-photon eigenmodes, (1 +- cos(dphi/2))/2.
inline std::pair<double, double> weak_eigen_weights(
    const scene::SceneParams& sc) {
  const double half = 0.5 * scene::phase_separation(sc);
  return {0.5 * (1.0 + std::cos(half)), 0.5 * (1.0 - std::cos(half))};
}

/// Weak-source QFI matrix over (centroid, separation):
/// u0^2 * diag(cos^2(dphi/2), 1/4). The separation entry is independent of
/// the separation itself.
inline Eigen::Matrix2d weak_qfi(const scene::SceneParams& sc) {
  const double u0 = sc.u0();
  const double half = 0.5 * scene::phase_separation(sc);
  Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
  f(0, 0) = u0 * u0 * std::cos(half) * std::cos(half);
  f(1, 1) = 0.25 * u0 * u0;
  return f;
}

struct WeakFi {
  double i11 = 0.0;
  double i22 = 0.0;
  double i12 = 0.0;
};

/// Classical FI of the weak-source projective measurements when the applied
/// delay misses the centroid phase by xi. The cross entry vanishes exactly
/// at xi = 0 and only there.
inline WeakFi weak_fi_misaligned(const scene::SceneParams& sc, double xi) {
  const double u0 = sc.u0();
  const double u2 = u0 * u0;
  const double dphi = scene::phase_separation(sc);
  const double ch = std::cos(0.5 * dphi);
  const double sh = std::sin(0.5 * dphi);
  const double cx = std::cos(xi);
  const double sx = std::sin(xi);

  WeakFi out;
  const double den22 = 1.0 - cx * cx * ch * ch;
  out.i22 = den22 > 0.0 ? 0.25 * u2 * cx * cx * sh * sh / den22 : 0.25 * u2;
  const double den11 = 1.0 - sx * sx * ch * ch;
  out.i11 = den11 > 0.0 ? u2 * cx * cx * ch * ch / den11 : 0.0;
  const double den12 = 1.0 - ch * ch * cx * cx;
  out.i12 = den12 > 0.0
                ? 0.125 * u2 * std::sin(dphi) * std::sin(2.0 * xi) / den12
                : 0.0;
  return out;
}

/// Same, parametrized by the absolute delay instead of the deviation.
inline WeakFi weak_fi_for_delay(const scene::SceneParams& sc, double delta) {
  return weak_fi_misaligned(sc, scene::centroid_phase(sc) - delta);
}

struct ConsistencyRow {
  double eps = 0.0;
  double dphi = 0.0;
  double f22_over_weak_limit = 0.0;  ///< separation QFI / (eps * u0^2), -> 1
  double d1_analytic = 0.0;
  double d1_conditional = 0.0;  ///< P(1,0)/(P(1,0)+P(0,1)) from aligned counts
  double f11_fit = 0.0;  ///< centroid QFI / (eps * weak centroid QFI), tracked
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
  double max_f22_deviation = 0.0;
  double max_d1_deviation = 0.0;
};

/// Checks that the strong-source machinery collapses onto the weak-source
/// results as the strength goes to zero. The single-photon eigenmode weights
/// are recovered from the aligned counting statistics conditioned on one
/// detected photon. The centroid proportionality constant is reported, not
/// asserted.
inline ConsistencyReport strong_weak_consistency(
    const std::vector<double>& eps_grid, const std::vector<double>& dphi_grid,
    double u0 = 1.0) {
  ConsistencyReport report;
  for (double eps : eps_grid)
    for (double dphi : dphi_grid) {
      const auto sc = scene::SceneParams::reduced(eps, 0.0, dphi / u0, u0);
      ConsistencyRow row;
      row.eps = eps;
      row.dphi = dphi;
      row.f22_over_weak_limit =
          fisher::qfi_separation_closed(sc) / (eps * u0 * u0);
      const auto [d1, d2] = weak_eigen_weights(sc);
      row.d1_analytic = d1;
      const auto dist = povm::aligned_pmn(sc, 1, 1);
      const double p10 = dist.p(1, 0), p01 = dist.p(0, 1);
      row.d1_conditional = p10 + p01 > 0.0 ? p10 / (p10 + p01) : 0.5;
      const double weak_f11 = weak_qfi(sc)(0, 0);
      row.f11_fit = weak_f11 > 0.0
                        ? fisher::qfi_centroid_closed(sc) / (eps * weak_f11)
                        : 0.0;
      report.max_f22_deviation =
          std::max(report.max_f22_deviation,
                   std::abs(row.f22_over_weak_limit - 1.0));
      report.max_d1_deviation = std::max(
          report.max_d1_deviation, std::abs(row.d1_conditional - d1));
      report.rows.push_back(row);
    }
  return report;
}

// ---------------------------------------------------------------------------
// Fixed-delay photon counting, the scheme conventionally used to sample the
// coherence function.
// ---------------------------------------------------------------------------

/// Delay pair defining the conventional measurement. The mirrored pair
/// {0, pi} is the default used by the comparison tables (the two settings
/// produce the same statistics with the output ports swapped); {0, pi/2}
/// measures the two coherence quadratures and is provided for sensitivity
/// studies of the combination rule.
enum class ConventionalDelays { mirrored_pair, quadrature_pair };

struct ConventionalFi {
  std::array<double, 2> delta{};
  std::array<double, 2> fi{};
  double combined = 0.0;  ///< equal-split average of the two settings
};

/// FI of photon counting (window m,n <= 3) at two fixed delays, combined as
/// the average (half the samples at each setting). Per-setting values are
/// returned so any other combination can be post-computed.
inline ConventionalFi conventional_fi(
    const scene::SceneParams& sc, const povm::IntegrationConfig& cfg,
    ConventionalDelays rule = ConventionalDelays::mirrored_pair,
    int mmax = 3, int nmax = 3) {
  ConventionalFi out;
  out.delta = rule == ConventionalDelays::mirrored_pair
                  ? std::array<double, 2>{0.0, M_PI}
                  : std::array<double, 2>{0.0, 0.5 * M_PI};
  for (int i = 0; i < 2; ++i)
    out.fi[i] = povm::misaligned_fi(sc, out.delta[i], cfg, mmax, nmax);
  out.combined = 0.5 * (out.fi[0] + out.fi[1]);
  return out;
}

/// FI of the aligned counting measurement with the same detector window,
/// the "optimal" side of the comparison.
inline double optimal_fi(const scene::SceneParams& sc,
                         const povm::IntegrationConfig& cfg, int mmax = 3,
                         int nmax = 3) {
  return povm::aligned_fi(sc, mmax, nmax, cfg);
}

/// Ratio of optimal to conventional FI; under 1/n mean-square-error scaling
/// this is the observation-time saving factor.
inline double observation_time_ratio(
    const scene::SceneParams& sc, const povm::IntegrationConfig& cfg,
    ConventionalDelays rule = ConventionalDelays::mirrored_pair) {
  const double conv = conventional_fi(sc, cfg, rule).combined;
  return optimal_fi(sc, cfg) / conv;
}

// ---------------------------------------------------------------------------
// Aperture-synthesis toy: the point-spread function of a sampled (u,v) plane.
// ---------------------------------------------------------------------------

/// Boolean sampling mask over an N x N (u,v) grid with spacing du;
/// u_j = (j - N/2) du.
struct SamplingPattern {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  double du = 1.0;

  void validate() const {
    if (mask.rows() != mask.cols() || mask.rows() < 2)
      throw std::invalid_argument("SamplingPattern: square grid >= 2");
    if (!(du > 0.0)) throw std::invalid_argument("SamplingPattern: du > 0");
    if (!mask.any())
      throw std::invalid_argument("SamplingPattern: at least one sample");
  }

  int size() const { return static_cast<int>(mask.rows()); }

  /// Centered square of half-width `half_cells` grid cells.
  static SamplingPattern rectangle(int n, int half_cells, double du = 1.0) {
    SamplingPattern p;
    p.mask.setConstant(n, n, false);
    p.du = du;
    const int c = n / 2;
    for (int i = std::max(0, c - half_cells);
         i <= std::min(n - 1, c + half_cells); ++i)
      for (int j = std::max(0, c - half_cells);
           j <= std::min(n - 1, c + half_cells); ++j)
        p.mask(i, j) = true;
    return p;
  }

  static SamplingPattern full(int n, double du = 1.0) {
    SamplingPattern p;
    p.mask.setConstant(n, n, true);
    p.du = du;
    return p;
  }

  /// Image-plane grid spacing conjugate to the (u,v) grid.
  double image_spacing() const { return 2.0 * M_PI / (size() * du); }
};

namespace detail {

inline Eigen::MatrixXcd dft_matrix(int n, double sign) {
  Eigen::MatrixXcd f(n, n);
  const int c = n / 2;
  for (int p = 0; p < n; ++p)
    for (int j = 0; j < n; ++j)
      f(p, j) = std::exp(Cplx(0.0, sign * 2.0 * M_PI * (p - c) * (j - c) / n));
  return f;
}

}  // namespace detail

/// Point-spread function of the sampling pattern: the centered discrete
/// Fourier transform of the mask, kernel e^{i(lu + mv)}. Real and even for
/// symmetric patterns.
inline Eigen::MatrixXd dirty_beam(const SamplingPattern& pattern) {
  pattern.validate();
  const int n = pattern.size();
  const Eigen::MatrixXcd f = detail::dft_matrix(n, +1.0);
  const Eigen::MatrixXcd s = pattern.mask.cast<Cplx>().matrix();
  return (f * s * f.transpose()).real();
}

/// Image seen through the sampled aperture: the sky image is carried to the
/// (u,v) plane, masked, and carried back, which convolves it with the dirty
/// beam. A point source maps to the beam translated to its position.
inline Eigen::MatrixXd dirty_image(const Eigen::MatrixXd& image,
                                   const SamplingPattern& pattern) {
  pattern.validate();
  const int n = pattern.size();
  if (image.rows() != n || image.cols() != n)
    throw DimensionError("dirty_image: image/pattern grids differ");
  const Eigen::MatrixXcd f = detail::dft_matrix(n, +1.0);
  const Eigen::MatrixXcd fi = detail::dft_matrix(n, -1.0) / double(n);
  const Eigen::MatrixXcd vis = fi * image.cast<Cplx>() * fi.transpose();
  const Eigen::MatrixXcd masked =
      vis.cwiseProduct(pattern.mask.cast<Cplx>().matrix());
  return (f * masked * f.transpose()).real();
}

/// Distance (in grid cells) from the beam center to the first non-positive
/// sample along the +u axis; the null itself lies within one cell of it.
inline int first_null_cells(const Eigen::MatrixXd& beam) {
  const int c = static_cast<int>(beam.rows()) / 2;
  for (int k = 1; c + k < beam.cols(); ++k)
    if (beam(c, c + k) <= 0.0) return k;
  return -1;
}

}  // namespace srif::limits
