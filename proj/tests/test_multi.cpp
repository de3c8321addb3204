// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "srif/fisher.hpp"
#include "srif/gaussian.hpp"
#include "srif/multi.hpp"

using namespace srif;

namespace {

/// Two sources on the x-axis seen by a two-detector baseline along u; chosen
/// so the far-field phases equal the two-telescope model with u0 = k*b/s0.
multi::MultiScene two_by_two(double eps, double x1, double x2,
                             double baseline = 1.0) {
  multi::MultiScene ms;
  ms.k = 1.0;
  ms.s0 = 1.0;
  ms.sources = {{x1, 0.0, 2.0 * eps}, {x2, 0.0, 2.0 * eps}};
  ms.detectors = {{0.0, 0.0}, {baseline, 0.0}};
  ms.eta.setConstant(2, 2, 0.5);
  return ms;
}

multi::MultiScene random_multi(std::mt19937& rng, int n_sources,
                               int n_detectors) {
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> strength(0.0, 1.5);
  std::uniform_real_distribution<double> eta_dist(0.0, 1.0);
  multi::MultiScene ms;
  ms.k = 1.0;
  ms.s0 = 1.0;
  for (int s = 0; s < n_sources; ++s)
    ms.sources.push_back({pos(rng), pos(rng), strength(rng)});
  for (int j = 0; j < n_detectors; ++j)
    ms.detectors.push_back({pos(rng) * 3.0, pos(rng) * 3.0});
  ms.eta.resize(n_sources, n_detectors);
  for (int s = 0; s < n_sources; ++s) {
    double row_sum = 0.0;
    for (int j = 0; j < n_detectors; ++j) {
      ms.eta(s, j) = eta_dist(rng);
      row_sum += ms.eta(s, j);
    }
    ms.eta.row(s) /= std::max(1.0, row_sum * 1.1);
  }
  return ms;
}

}  // namespace

TEST_CASE("two sources with two detectors reduce to the telescope model") {
  const double eps = 0.17;
  const auto ms = two_by_two(eps, 0.45, -0.35);
  const auto reduced = multi::multi_covariance(ms);
  const auto reference = gaussian::two_telescope_state(
      scene::SceneParams(1.0, 1.0, 1.0, 0.0, 0.5, 2.0 * eps, 0.45, -0.35));
  CHECK((reduced.cov - reference.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("strengthless sources give the vacuum") {
  auto ms = two_by_two(0.0, 0.3, -0.3);
  const auto st = multi::multi_covariance(ms);
  CHECK((st.cov - gaussian::GaussianState::vacuum(2).cov)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("single source produces a rank-one coherence block") {
  multi::MultiScene ms;
  ms.k = 1.3;
  ms.s0 = 2.0;
  ms.sources = {{0.4, -0.2, 0.8}};
  ms.detectors = {{0.0, 0.5}, {1.0, -0.3}, {-0.7, 0.9}, {2.0, 0.0}};
  ms.eta.resize(1, 4);
  ms.eta << 0.2, 0.3, 0.1, 0.15;

  const auto st = multi::multi_covariance(ms);
  const int n = ms.n_detectors();
  Eigen::VectorXcd w(n);
  for (int j = 0; j < n; ++j)
    w(j) = std::sqrt(ms.eta(0, j) * ms.sources[0].nbar) *
           std::exp(gaussian::Cplx(0.0, -ms.phase(0, j)));
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      const gaussian::Cplx expected =
          (l == m ? 0.5 : 0.0) + w(l) * std::conj(w(m));
      CHECK(std::abs(st.cov(2 * l, 2 * m + 1) - expected) < 1e-14);
    }
}

TEST_CASE("multi-source covariance is physical and permutation-equivariant") {
  std::mt19937 rng(911);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ms = random_multi(rng, 1 + trial % 4, 2 + trial % 3);
    const auto st = multi::multi_covariance(ms);
    CHECK(gaussian::is_symmetric(st.cov, 1e-12));
    CHECK(gaussian::physicality_check(st));
  }

  auto ms = random_multi(rng, 3, 4);
  auto swapped = ms;
  std::swap(swapped.detectors[1], swapped.detectors[3]);
  swapped.eta.col(1).swap(swapped.eta.col(3));
  const auto orig = multi::multi_covariance(ms);
  const auto perm = multi::multi_covariance(swapped);
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m) {
      const int lp = l == 1 ? 3 : (l == 3 ? 1 : l);
      const int mp = m == 1 ? 3 : (m == 3 ? 1 : m);
      CHECK(std::abs(orig.cov(2 * l, 2 * m + 1) -
                     perm.cov(2 * lp, 2 * mp + 1)) < 1e-14);
    }
}

TEST_CASE("numeric QFI of the reduced model matches the closed form") {
  const double eps = 0.12;
  const auto ms = two_by_two(eps, 0.6, -0.2);
  const auto f = multi::centroid_separation_qfi(ms);
  const auto sc = scene::SceneParams(1, 1, 1, 0, 0.5, 2.0 * eps, 0.6, -0.2);
  CHECK(f.separation() ==
        doctest::Approx(fisher::qfi_separation_closed(sc)).epsilon(1e-6));
  CHECK(f.centroid() ==
        doctest::Approx(fisher::qfi_centroid_closed(sc)).epsilon(1e-6));
}

TEST_CASE("no vertical baseline means no vertical information") {
  multi::MultiScene ms;
  ms.k = 1.0;
  ms.s0 = 1.0;
  ms.sources = {{0.3, 0.4, 0.6}, {-0.2, -0.1, 0.9}};
  ms.detectors = {{0.0, 0.7}, {1.2, 0.7}, {2.4, 0.7}};
  ms.eta.setConstant(2, 3, 0.25);

  // three detectors, two sources: one normal mode is pure, so the moment
  // solve needs the thermal floor
  using Axis = multi::CoordSelector::Axis;
  const auto f =
      multi::multi_qfi(ms, {{0, Axis::y}, {1, Axis::y}}, 1e-5, 1e-12);
  CHECK(std::abs(f.values(0, 0)) < 1e-18);
  CHECK(std::abs(f.values(1, 1)) < 1e-18);
}

TEST_CASE("separation information is translation invariant") {
  const double eps = 0.2;
  const auto base = two_by_two(eps, 0.5, -0.1);
  auto shifted = base;
  for (auto& src : shifted.sources) src.x += 0.8;
  const double f_base = multi::centroid_separation_qfi(base).separation();
  const double f_shift = multi::centroid_separation_qfi(shifted).separation();
  CHECK(f_base == doctest::Approx(f_shift).epsilon(1e-8));
}

TEST_CASE("stronger sources carry more position information") {
  std::mt19937 rng(913);
  using Axis = multi::CoordSelector::Axis;
  for (int trial = 0; trial < 5; ++trial) {
    auto ms = random_multi(rng, 2, 3);
    for (auto& src : ms.sources) src.nbar = std::max(src.nbar, 0.05);
    auto doubled = ms;
    for (auto& src : doubled.sources) src.nbar *= 2.0;
    const std::vector<multi::CoordSelector> params{{0, Axis::x}, {1, Axis::x}};
    const auto f1 = multi::multi_qfi(ms, params, 1e-5, 1e-12);
    const auto f2 = multi::multi_qfi(doubled, params, 1e-5, 1e-12);
    CHECK(f2.values(0, 0) > f1.values(0, 0));
    CHECK(f2.values(1, 1) > f1.values(1, 1));
  }
}

TEST_CASE("vacuum detector modes need the thermal floor") {
  auto ms = two_by_two(0.3, 0.4, -0.4);
  ms.detectors.push_back({0.5, 0.0});
  Eigen::MatrixXd eta(2, 3);
  eta << 0.5, 0.5, 0.0, 0.5, 0.5, 0.0;  // third detector sees nothing
  ms.eta = eta;
  using Axis = multi::CoordSelector::Axis;
  const std::vector<multi::CoordSelector> params{{0, Axis::x}, {1, Axis::x}};
  CHECK_THROWS_AS(multi::multi_qfi(ms, params), SingularMomentError);
  const auto f = multi::multi_qfi(ms, params, 1e-5, 1e-12);
  CHECK(std::isfinite(f.values(0, 0)));
}

TEST_CASE("scene serialization round trip") {
  std::mt19937 rng(915);
  const auto ms = random_multi(rng, 3, 4);
  const auto doc = ms.to_json();
  const auto back = multi::MultiScene::from_json(doc);
  CHECK(back.k == ms.k);
  CHECK(back.s0 == ms.s0);
  CHECK((back.eta - ms.eta).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < ms.sources.size(); ++i) {
    CHECK(back.sources[i].x == ms.sources[i].x);
    CHECK(back.sources[i].nbar == ms.sources[i].nbar);
  }
}

TEST_CASE("invalid scenes are rejected") {
  multi::MultiScene ms;
  ms.sources = {{0, 0, 1.0}};
  ms.detectors = {{0, 0}};
  ms.eta.setConstant(1, 1, 0.5);
  CHECK_THROWS_AS(ms.validate(), std::invalid_argument);  // one detector

  ms.detectors.push_back({1, 0});
  ms.eta.setConstant(1, 2, 0.6);  // total transmissivity 1.2 > 1
  CHECK_THROWS_AS(ms.validate(), std::invalid_argument);
}
