// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "srif/gaussian.hpp"

using namespace srif;
using gaussian::CMat;
using gaussian::Cplx;

namespace {

gaussian::ModeTransform random_unitary(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMat> qr(m);
  CMat q = qr.householderQ();
  return gaussian::ModeTransform(q);
}

}  // namespace

TEST_CASE("two-telescope covariance entries") {
  SUBCASE("zero strength gives the vacuum") {
    const auto st = gaussian::two_telescope_state(
        scene::SceneParams::reduced(0.0, 0.3, 0.7));
    CHECK((st.cov - gaussian::GaussianState::vacuum(2).cov)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  SUBCASE("coincident phases") {
    // phi1 = phi2 = phi with eta*nbar = 0.1: p = 0.7, q = 0.2 e^{i phi}
    const double phi = 0.8;
    const auto st = gaussian::two_telescope_state(
        scene::SceneParams::reduced(0.1, phi, 0.0));
    CHECK(st.cov(0, 1).real() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(std::abs(st.cov(0, 3) - 0.2 * std::exp(Cplx(0.0, phi))) < 1e-14);
  }
  SUBCASE("antipodal phases cancel the coherence") {
    const auto st = gaussian::two_telescope_state(
        scene::SceneParams::reduced(0.3, 0.4, M_PI));
    CHECK(std::abs(st.cov(0, 3)) < 1e-15);
  }
}

TEST_CASE("covariance symmetry, conjugation structure, physicality") {
  std::mt19937 rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto sc = testing::random_scene(rng, 0.0, 4.0, -8.0, 8.0);
    const auto st = gaussian::two_telescope_state(sc);
    CHECK(gaussian::is_symmetric(st.cov, 1e-12));
    CHECK(gaussian::conjugation_ok(st, 1e-12));
    CHECK(gaussian::physicality_check(st));
  }
  CHECK(gaussian::physicality_check(gaussian::GaussianState::vacuum(3)));

  // sub-vacuum variance p = 0.4 < 1/2 is unphysical
  auto bad = gaussian::two_telescope_state(
      scene::SceneParams::reduced(0.1, 0.0, 1.0));
  bad.cov(0, 1) = bad.cov(1, 0) = 0.4;
  bad.cov(2, 3) = bad.cov(3, 2) = 0.4;
  CHECK_FALSE(gaussian::physicality_check(bad));
}

TEST_CASE("mode occupations") {
  CHECK(gaussian::mode_occupations(gaussian::GaussianState::vacuum(2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  const auto st = gaussian::two_telescope_state(
      scene::SceneParams::reduced(0.25, 0.1, 0.9));
  const auto occ = gaussian::mode_occupations(st);
  CHECK(occ(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(occ(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("transforms preserve state structure") {
  std::mt19937 rng(5);
  const auto sc = testing::random_scene(rng, 0.05, 1.5, 0.3, 5.0);
  const auto st = gaussian::two_telescope_state(sc);

  SUBCASE("identity leaves the state unchanged") {
    const auto id = gaussian::ModeTransform(CMat(CMat::Identity(2, 2)));
    const auto out = gaussian::apply_transform(st, id);
    CHECK((out.cov - st.cov).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("vacuum maps to vacuum") {
    for (int i = 0; i < 5; ++i) {
      const auto t = random_unitary(2, rng);
      const auto out =
          gaussian::apply_transform(gaussian::GaussianState::vacuum(2), t);
      CHECK((out.cov - gaussian::GaussianState::vacuum(2).cov)
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  }

  SUBCASE("occupation and physicality survive any unitary") {
    const double total = gaussian::mode_occupations(st).sum();
    for (int i = 0; i < 10; ++i) {
      const auto out = gaussian::apply_transform(st, random_unitary(2, rng));
      CHECK(gaussian::mode_occupations(out).sum() ==
            doctest::Approx(total).epsilon(1e-12));
      CHECK(gaussian::physicality_check(out));
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    const auto t3 = gaussian::ModeTransform(CMat(CMat::Identity(3, 3)));
    CHECK_THROWS_AS(gaussian::apply_transform(st, t3), DimensionError);
  }
}

TEST_CASE("centroid-phase beam splitter decouples the output modes") {
  std::mt19937 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto sc = testing::random_scene(rng, 0.05, 2.0, -6.0, 6.0);
    const auto st = gaussian::two_telescope_state(sc);
    const double delta = scene::centroid_phase(sc);
    const auto out = gaussian::apply_transform(
        st, gaussian::ModeTransform::beam_splitter(delta));

    // cross-mode covariance entries vanish
    for (int a = 0; a < 2; ++a)
      for (int b = 2; b < 4; ++b) CHECK(std::abs(out.cov(a, b)) < 1e-12);

    const double eps = sc.strength();
    const double half = 0.5 * scene::phase_separation(sc);
    const auto occ = gaussian::mode_occupations(out);
    CHECK(occ(0) == doctest::Approx(2.0 * eps * (1.0 + std::cos(half)))
                        .epsilon(1e-12));
    CHECK(occ(1) == doctest::Approx(2.0 * eps * (1.0 - std::cos(half)))
                        .epsilon(1e-12));
  }
}

TEST_CASE("covariance matches the Fock-space mixture reconstruction") {
  // End-to-end check of the received-state construction against quadrature
  // over the coherent mixture with truncated ladder operators.
  for (const auto& [eps, dphi, centroid] :
       {std::tuple{0.05, 1.3, 0.4}, std::tuple{0.2, 2.9, -0.7},
        std::tuple{0.15, 0.2, 0.0}}) {
    const auto sc = scene::SceneParams::reduced(eps, centroid, dphi);
    const auto st = gaussian::two_telescope_state(sc);
    const CMat oracle = testing::gh_covariance_oracle(sc, 20, 12);
    CHECK((st.cov - oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("non-unitary transforms are rejected") {
  CMat m = CMat::Identity(2, 2);
  m(0, 0) = 1.2;
  CHECK_THROWS_AS(gaussian::ModeTransform{m}, std::invalid_argument);
}
