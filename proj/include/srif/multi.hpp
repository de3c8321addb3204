// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "srif/errors.hpp"
#include "srif/fisher.hpp"
#include "srif/gaussian.hpp"

namespace srif::multi {

using gaussian::CMat;
using gaussian::Cplx;
using gaussian::CVec;
using gaussian::GaussianState;

/// M thermal point sources on a 2D source plane observed by n detectors,
/// with per-path transmissivities eta(s, j) and far-field phases
/// phi_sj = k (u_j x_s + v_j y_s) / s0.
struct MultiScene {
  struct Source {
    double x = 0.0;
    double y = 0.0;
    double nbar = 0.0;
  };
  struct Detector {
    double u = 0.0;
    double v = 0.0;
  };

  double k = 1.0;
  double s0 = 1.0;
  std::vector<Source> sources;
  std::vector<Detector> detectors;
  Eigen::MatrixXd eta;  ///< (n_sources x n_detectors)

  void validate() const {
    if (sources.empty()) throw std::invalid_argument("MultiScene: no sources");
    if (detectors.size() < 2)
      throw std::invalid_argument("MultiScene: need at least 2 detectors");
    if (eta.rows() != static_cast<Eigen::Index>(sources.size()) ||
        eta.cols() != static_cast<Eigen::Index>(detectors.size()))
      throw DimensionError("MultiScene: eta shape mismatch");
    if (!(k > 0.0 && s0 > 0.0))
      throw std::invalid_argument("MultiScene: k, s0 must be > 0");
    for (const auto& src : sources)
      if (src.nbar < 0.0)
        throw std::invalid_argument("MultiScene: source strength < 0");
    for (Eigen::Index s = 0; s < eta.rows(); ++s) {
      if ((eta.row(s).array() < 0.0).any())
        throw std::invalid_argument("MultiScene: eta entries must be >= 0");
      if (eta.row(s).sum() > 1.0 + 1e-12)
        throw std::invalid_argument(
            "MultiScene: per-source total transmissivity exceeds 1");
    }
  }

  int n_sources() const { return static_cast<int>(sources.size()); }
  int n_detectors() const { return static_cast<int>(detectors.size()); }

  double phase(int s, int j) const {
    return k * (detectors[j].u * sources[s].x + detectors[j].v * sources[s].y) /
           s0;
  }

  /// phi_sm - phi_sl with the baseline difference factored out, so equal
  /// detector coordinates drop out of the phase exactly.
  double phase_difference(int s, int l, int m) const {
    return k *
           ((detectors[m].u - detectors[l].u) * sources[s].x +
            (detectors[m].v - detectors[l].v) * sources[s].y) /
           s0;
  }

  static MultiScene from_json(const nlohmann::json& doc) {
    MultiScene ms;
    ms.k = doc.at("k").get<double>();
    ms.s0 = doc.at("s0").get<double>();
    for (const auto& s : doc.at("sources"))
      ms.sources.push_back({s.at("x").get<double>(), s.at("y").get<double>(),
                            s.at("nbar").get<double>()});
    for (const auto& d : doc.at("detectors"))
      ms.detectors.push_back({d.at("u").get<double>(), d.at("v").get<double>()});
    const auto& rows = doc.at("eta");
    ms.eta.resize(ms.sources.size(), ms.detectors.size());
    for (Eigen::Index s = 0; s < ms.eta.rows(); ++s)
      for (Eigen::Index j = 0; j < ms.eta.cols(); ++j)
        ms.eta(s, j) = rows.at(s).at(j).get<double>();
    ms.validate();
    return ms;
  }

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["k"] = k;
    doc["s0"] = s0;
    doc["sources"] = nlohmann::json::array();
    for (const auto& s : sources)
      doc["sources"].push_back({{"x", s.x}, {"y", s.y}, {"nbar", s.nbar}});
    doc["detectors"] = nlohmann::json::array();
    for (const auto& d : detectors)
      doc["detectors"].push_back({{"u", d.u}, {"v", d.v}});
    doc["eta"] = nlohmann::json::array();
    for (Eigen::Index s = 0; s < eta.rows(); ++s) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < eta.cols(); ++j) row.push_back(eta(s, j));
      doc["eta"].push_back(row);
    }
    return doc;
  }
};

/// Covariance of the joint detector state: zero mean, diagonal blocks carry
/// 1/2 + sum_s eta_sl N_s and off-diagonal blocks the source-summed
/// coherences sqrt(eta_sl eta_sm) N_s e^{i(phi_sm - phi_sl)}.
inline GaussianState multi_covariance(const MultiScene& ms) {
  ms.validate();
  const int n = ms.n_detectors();
  CMat cov = CMat::Zero(2 * n, 2 * n);
  for (int l = 0; l < n; ++l) {
    double occ = 0.0;
    for (int s = 0; s < ms.n_sources(); ++s)
      occ += ms.eta(s, l) * ms.sources[s].nbar;
    cov(2 * l, 2 * l + 1) = 0.5 + occ;
    cov(2 * l + 1, 2 * l) = 0.5 + occ;
  }
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      if (l == m) continue;
      Cplx coh = 0.0;
      for (int s = 0; s < ms.n_sources(); ++s) {
        const double amp =
            std::sqrt(ms.eta(s, l) * ms.eta(s, m)) * ms.sources[s].nbar;
        coh += amp * std::exp(Cplx(0.0, ms.phase_difference(s, l, m)));
      }
      cov(2 * l, 2 * m + 1) = coh;
      cov(2 * m + 1, 2 * l) = coh;
    }
  return GaussianState(CVec::Zero(2 * n), cov);
}

/// Selects one source coordinate as an estimation parameter.
struct CoordSelector {
  int source = 0;
  enum class Axis { x, y } axis = Axis::x;
};

/// Numeric QFI over the selected source coordinates. A positive n_floor adds
/// that thermal occupation to every detector mode first; it is needed
/// whenever some normal mode of the state is exactly vacuum, e.g. a detector
/// nothing couples to, or any array with more detectors than sources.
inline fisher::QfiMatrix multi_qfi(const MultiScene& ms,
                                   const std::vector<CoordSelector>& params,
                                   double step = 1e-5, double n_floor = 0.0) {
  ms.validate();
  Eigen::VectorXd p0(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = ms.sources[params[i].source];
    p0(i) = params[i].axis == CoordSelector::Axis::x ? src.x : src.y;
  }
  auto family = [ms, params, n_floor](const Eigen::VectorXd& p) {
    MultiScene local = ms;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& src = local.sources[params[i].source];
      (params[i].axis == CoordSelector::Axis::x ? src.x : src.y) = p(i);
    }
    GaussianState st = multi_covariance(local);
    return n_floor > 0.0 ? gaussian::with_thermal_floor(st, n_floor) : st;
  };
  return fisher::qfi_numeric(family, p0, step);
}

/// Centroid/separation QFI for a source pair along one axis, via the linear
/// reparametrization x = theta1 +- theta2/2.
inline fisher::QfiMatrix centroid_separation_qfi(
    const MultiScene& ms, int source_a = 0, int source_b = 1,
    CoordSelector::Axis axis = CoordSelector::Axis::x, double step = 1e-5,
    double n_floor = 0.0) {
  const auto fx =
      multi_qfi(ms, {{source_a, axis}, {source_b, axis}}, step, n_floor);
  Eigen::Matrix2d jac;
  jac << 1.0, 0.5, 1.0, -0.5;  // columns: d(x_a,x_b)/d(theta1,theta2)
  return fisher::QfiMatrix{jac.transpose() * fx.values * jac};
}

}  // namespace srif::multi
