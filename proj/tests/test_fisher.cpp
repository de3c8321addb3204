// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "srif/fisher.hpp"
#include "srif/gaussian.hpp"

using namespace srif;
using gaussian::CMat;
using gaussian::Cplx;

TEST_CASE("numeric QFI reproduces the closed forms") {
  std::mt19937 rng(101);
  for (int i = 0; i < 25; ++i) {
    const auto sc = testing::random_scene(rng, 0.01, 5.0, 0.1, 2.0 * M_PI - 0.1);
    const auto f = fisher::qfi_two_telescope_numeric(sc);
    const double f22 = fisher::qfi_separation_closed(sc);
    const double f11 = fisher::qfi_centroid_closed(sc);
    CHECK(f.separation() == doctest::Approx(f22).epsilon(1e-7));
    CHECK(f.centroid() == doctest::Approx(f11).epsilon(1e-7));
    CHECK(std::abs(f.cross()) <= 1e-9 * f22);
    CHECK(f22 > 0.0);
    CHECK(f11 > 0.0);
  }
}

TEST_CASE("zero-mean families get no displacement contribution") {
  const auto sc = scene::SceneParams::reduced(0.4, 0.2, 1.1);
  const auto base = fisher::qfi_two_telescope_numeric(sc);

  // adding a parameter-independent displacement must not change anything
  auto family = fisher::two_telescope_family(sc);
  fisher::StateFamily shifted = [family](const Eigen::VectorXd& p) {
    auto st = family(p);
    st.mean.setConstant(Cplx(0.3, -0.1));
    return st;
  };
  Eigen::VectorXd p(2);
  p << sc.centroid(), sc.separation();
  const auto with_shift = fisher::qfi_numeric(shifted, p);
  CHECK((with_shift.values - base.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("separation QFI closed form") {
  SUBCASE("zero-separation limit") {
    const auto sc = scene::SceneParams::reduced(0.1, 0.0, 0.0);
    CHECK(fisher::qfi_separation_closed(sc) ==
          doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("half-period value") {
    const auto sc = scene::SceneParams::reduced(0.1, 0.0, M_PI);
    CHECK(fisher::qfi_separation_closed(sc) ==
          doctest::Approx(0.1 / 1.2).epsilon(1e-12));
  }
  SUBCASE("periodicity and parity") {
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> dphi_dist(-6.0, 6.0);
    for (int i = 0; i < 50; ++i) {
      const double eps = 0.01 + 0.5 * i;
      const double dphi = dphi_dist(rng);
      const auto at = [eps](double d) {
        return fisher::qfi_separation_closed(
            scene::SceneParams::reduced(eps, 0.0, d));
      };
      CHECK(at(dphi) == doctest::Approx(at(dphi + 2.0 * M_PI)).epsilon(1e-13));
      CHECK(at(dphi) == doctest::Approx(at(-dphi)).epsilon(1e-13));
      CHECK(at(dphi) ==
            doctest::Approx(at(2.0 * M_PI - dphi)).epsilon(1e-13));
    }
  }
}

TEST_CASE("centroid QFI closed form") {
  SUBCASE("zero-separation limit") {
    const auto sc = scene::SceneParams::reduced(0.1, 0.0, 0.0);
    CHECK(fisher::qfi_centroid_closed(sc) ==
          doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("vanishes at the half period") {
    const auto sc = scene::SceneParams::reduced(0.1, 0.0, M_PI);
    CHECK(fisher::qfi_centroid_closed(sc) == doctest::Approx(0.0));
  }
  SUBCASE("linear in the strength at weak coupling") {
    const double dphi = 1.3;
    const double ref =
        fisher::qfi_centroid_closed(
            scene::SceneParams::reduced(1e-7, 0.0, dphi)) /
        1e-7;
    for (double eps : {1e-6, 1e-5, 1e-4}) {
      const double val = fisher::qfi_centroid_closed(
                             scene::SceneParams::reduced(eps, 0.0, dphi)) /
                         eps;
      CHECK(val == doctest::Approx(ref).epsilon(1e-3));
    }
  }
}

TEST_CASE("information grows with source strength") {
  // dF22/d(eps) > 0 over a dense grid
  for (double eps = 1e-3; eps < 10.0; eps *= 1.9)
    for (double dphi = 0.1; dphi < 2.0 * M_PI; dphi += 0.35) {
      const double h = 1e-6 * std::max(eps, 1e-3);
      const double up = fisher::qfi_separation_closed(
          scene::SceneParams::reduced(eps + h, 0.0, dphi));
      const double dn = fisher::qfi_separation_closed(
          scene::SceneParams::reduced(eps - h, 0.0, dphi));
      CHECK(up > dn);
    }
}

TEST_CASE("per-photon information decreases at the half period") {
  double prev = 1e300;
  for (double eps : {0.05, 0.2, 1.0, 5.0}) {
    const double per_photon =
        fisher::qfi_separation_closed(
            scene::SceneParams::reduced(eps, 0.0, M_PI)) /
        eps;
    CHECK(per_photon < prev);
    prev = per_photon;
  }
}

TEST_CASE("numeric SLD is traceless, reproduces the QFI, and handles zero") {
  std::mt19937 rng(77);
  for (int i = 0; i < 15; ++i) {
    const auto sc = testing::random_scene(rng, 0.05, 3.0, 0.2, 6.0);
    const auto st = gaussian::two_telescope_state(sc);

    Eigen::VectorXd p(2);
    p << sc.centroid(), sc.separation();
    auto family = fisher::two_telescope_family(sc);
    const double h = 1e-5;
    for (int param = 0; param < 2; ++param) {
      Eigen::VectorXd up = p, dn = p;
      up(param) += h;
      dn(param) -= h;
      const CMat dcov = (family(up).cov - family(dn).cov) / (2.0 * h);
      const auto sld = fisher::sld_numeric(st, dcov);

      CHECK(std::abs(sld.expectation_raw(st)) < 1e-10);

      const double fii = param == 0 ? fisher::qfi_centroid_closed(sc)
                                    : fisher::qfi_separation_closed(sc);
      const Cplx second_moment = testing::wick_variance(st, sld);
      CHECK(std::abs(second_moment.imag()) < 1e-10 * std::abs(fii));
      CHECK(second_moment.real() == doctest::Approx(fii).epsilon(1e-7));
    }

    const auto zero = fisher::sld_numeric(st, CMat::Zero(4, 4));
    CHECK(zero.coeff.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.constant == 0.0);
  }
}

TEST_CASE("closed-form SLD coefficients match the numeric SLD") {
  std::mt19937 rng(78);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const auto sc = testing::random_scene(rng, 0.05, 2.0, 0.3, 5.8);
    const auto st = gaussian::two_telescope_state(sc);
    auto family = fisher::two_telescope_family(sc);
    Eigen::VectorXd p(2);
    p << sc.centroid(), sc.separation();

    for (int param = 0; param < 2; ++param) {
      Eigen::VectorXd up = p, dn = p;
      up(param) += h;
      dn(param) -= h;
      const CMat dcov = (family(up).cov - family(dn).cov) / (2.0 * h);
      const auto numeric = fisher::sld_numeric(st, dcov);
      const auto closed = param == 0 ? fisher::assemble_centroid_sld(sc)
                                     : fisher::assemble_separation_sld(sc);
      CHECK((numeric.coeff - closed.coeff).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(numeric.constant ==
            doctest::Approx(closed.constant).epsilon(1e-8));
    }
  }
}

TEST_CASE("separation SLD coefficient identities") {
  SUBCASE("constant matches its defining combination") {
    const auto sc = scene::SceneParams::reduced(0.35, 0.6, 1.7);
    const auto co = fisher::sld_separation_coeffs(sc);
    const auto ph = scene::phases_from_positions(sc);
    const Cplx sum =
        std::exp(Cplx(0, ph.phi1)) + std::exp(Cplx(0, ph.phi2));
    const double expected =
        -sc.strength() *
        (8.0 * co.l1 + 2.0 * (co.l2 * sum + std::conj(co.l2 * sum)).real());
    CHECK(co.constant == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("half-period, zero centroid: l2 is real") {
    const auto sc = scene::SceneParams::reduced(0.2, 0.0, M_PI);
    const auto co = fisher::sld_separation_coeffs(sc);
    CHECK(std::abs(co.l2.imag()) < 1e-15);
  }
  SUBCASE("degenerate separation is refused") {
    CHECK_THROWS_AS(fisher::sld_separation_coeffs(
                        scene::SceneParams::reduced(0.2, 0.0, 1e-9)),
                    CoefficientSingularity);
    CHECK_THROWS_AS(fisher::sld_separation_coeffs(scene::SceneParams::reduced(
                        0.2, 0.0, 2.0 * M_PI + 1e-10)),
                    CoefficientSingularity);
  }
}

TEST_CASE("centroid SLD coefficient identities") {
  SUBCASE("half period zeroes the coupling") {
    const auto sc = scene::SceneParams::reduced(0.2, 0.7, M_PI);
    const auto co = fisher::sld_centroid_coeffs(sc);
    CHECK(std::abs(co.l3) < 1e-15);
  }
  SUBCASE("variance equals the centroid QFI") {
    std::mt19937 rng(79);
    for (int i = 0; i < 10; ++i) {
      const auto sc = testing::random_scene(rng, 0.05, 2.0, 0.3, 5.5);
      const auto st = gaussian::two_telescope_state(sc);
      const auto sld = fisher::assemble_centroid_sld(sc);
      const double f11 = fisher::qfi_centroid_closed(sc);
      CHECK(testing::wick_variance(st, sld).real() ==
            doctest::Approx(f11).epsilon(1e-7));
    }
  }
}

TEST_CASE("optimal delay") {
  using fisher::Parameter;
  CHECK(fisher::optimal_delay(scene::SceneParams::reduced(0.1, 0.0, 0.0),
                              Parameter::separation) == 0.0);
  // phi1 = 0.3, phi2 = 0.5 -> centroid phase 0.4
  const auto sc = scene::SceneParams::reduced(0.1, 0.4, -0.2);
  CHECK(fisher::optimal_delay(sc, Parameter::separation) ==
        doctest::Approx(0.4).epsilon(1e-14));
  CHECK(fisher::optimal_delay(sc, Parameter::centroid) ==
        doctest::Approx(0.4 - M_PI / 2.0 + 2.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("optimal delay diagonalizes the separation SLD") {
  std::mt19937 rng(81);
  for (int i = 0; i < 10; ++i) {
    const auto sc = testing::random_scene(rng, 0.05, 2.0, 0.3, 5.5);
    const auto sld = fisher::assemble_separation_sld(sc);
    const double delta =
        fisher::optimal_delay(sc, fisher::Parameter::separation);
    const auto in_d_basis =
        sld.transformed(gaussian::ModeTransform::beam_splitter(delta));
    // no cross-mode terms survive
    for (int a = 0; a < 2; ++a)
      for (int b = 2; b < 4; ++b) {
        CHECK(std::abs(in_d_basis.coeff(a, b)) < 1e-10);
        CHECK(std::abs(in_d_basis.coeff(b, a)) < 1e-10);
      }
    // and no photon-pair terms either: the observable is a function of the
    // output number operators
    CHECK(std::abs(in_d_basis.coeff(0, 0)) < 1e-10);
    CHECK(std::abs(in_d_basis.coeff(1, 1)) < 1e-10);
    CHECK(std::abs(in_d_basis.coeff(2, 2)) < 1e-10);
    CHECK(std::abs(in_d_basis.coeff(3, 3)) < 1e-10);
  }
}

TEST_CASE("information scales with the square of the phase gradient") {
  // reduced-units contract: QFI carries u0^2, so the u0 = 1 tables convert
  // to any geometry by rescaling
  for (double u0 : {0.5, 2.0, 7.0}) {
    const auto unit = scene::SceneParams::reduced(0.3, 0.1, 1.4, 1.0);
    const auto scaled =
        scene::SceneParams::reduced(0.3, 0.1 / u0, 1.4 / u0, u0);
    CHECK(fisher::qfi_separation_closed(scaled) ==
          doctest::Approx(u0 * u0 * fisher::qfi_separation_closed(unit))
              .epsilon(1e-12));
    CHECK(fisher::qfi_centroid_closed(scaled) ==
          doctest::Approx(u0 * u0 * fisher::qfi_centroid_closed(unit))
              .epsilon(1e-12));
  }
}

TEST_CASE("pure modes make the moment system fail loudly") {
  const auto vacuum_scene = scene::SceneParams::reduced(0.0, 0.0, 1.0);
  CHECK_THROWS_AS(fisher::qfi_two_telescope_numeric(vacuum_scene),
                  SingularMomentError);

  // a thermal floor restores solvability
  auto family = [&](const Eigen::VectorXd& p) {
    return gaussian::with_thermal_floor(
        gaussian::two_telescope_state(
            vacuum_scene.with_positions(p(0), p(1))),
        1e-12);
  };
  Eigen::VectorXd p(2);
  p << 0.0, 1.0;
  const auto f = fisher::qfi_numeric(family, p);
  CHECK(std::isfinite(f.separation()));
}
