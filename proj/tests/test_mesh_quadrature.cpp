// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "knd/mesh.hpp"
#include "knd/quadrature.hpp"

using namespace knd;

TEST_CASE("mesh construction") {
  const Mesh m4 = build_mesh(4);
  CHECK(m4.h == std::numbers::pi / 4);
  CHECK(m4.node(0) == 0.0);
  CHECK(m4.node(1) == Catch::Approx(std::numbers::pi / 4));
  CHECK(m4.node(2) == Catch::Approx(std::numbers::pi / 2));
  CHECK(m4.node(4) == std::numbers::pi);
  CHECK(m4.h * m4.n == Catch::Approx(std::numbers::pi).margin(1e-15));

  CHECK_THROWS_AS(build_mesh(3), MeshTooCoarse);
  CHECK(build_mesh(3142).h == Catch::Approx(0.0009997).margin(5e-7));

  CHECK(elements_for_width(0.001) == 3142);
  CHECK(elements_for_width(0.02) == 157);
  CHECK(elements_for_width(0.005) == 628);
  CHECK(elements_for_width(2.0) == 4);  // clamped to the standing assumption
  CHECK_THROWS_AS(elements_for_width(0.0), MeshTooCoarse);
}

TEST_CASE("hat basis") {
  const Mesh mesh = build_mesh(8);

  SECTION("Kronecker property and boundary vanishing") {
    for (int j = 1; j <= mesh.n - 1; ++j) {
      for (int k = 1; k <= mesh.n - 1; ++k) {
        CHECK(hat_value(mesh, j, mesh.node(k)) == (j == k ? 1.0 : 0.0));
      }
      CHECK(hat_value(mesh, j, 0.0) == 0.0);
      CHECK(hat_value(mesh, j, std::numbers::pi) == 0.0);
    }
  }

  SECTION("partition of unity on the interior, never above one") {
    for (double theta = 1e-3; theta < std::numbers::pi; theta += 0.01) {
      double sum = 0.0;
      for (int j = 1; j <= mesh.n - 1; ++j) sum += hat_value(mesh, j, theta);
      CHECK(sum <= 1.0 + 1e-12);
      if (theta >= mesh.node(1) && theta <= mesh.node(mesh.n - 1)) {
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
      }
    }
  }

  SECTION("derivative is +-1/h on the support") {
    const double inside = mesh.node(3) + 0.25 * mesh.h;
    CHECK(hat_derivative(mesh, 4, inside) == Catch::Approx(1.0 / mesh.h));
    CHECK(hat_derivative(mesh, 3, inside) == Catch::Approx(-1.0 / mesh.h));
    CHECK(hat_derivative(mesh, 1, inside) == 0.0);
  }
}

TEST_CASE("Gauss-Legendre rules") {
  SECTION("order 2 is the textbook rule") {
    const GaussRule r = gauss_legendre(2);
    CHECK(r.nodes[0] == Catch::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r.nodes[1] == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r.weights[0] == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(r.weights[1] == Catch::Approx(1.0).epsilon(1e-14));
  }

  SECTION("order m integrates monomials up to degree 2m-1") {
    for (int m : {4, 9, 16, 32}) {
      const GaussRule r = gauss_legendre(m);
      double wsum = 0.0;
      for (double w : r.weights) wsum += w;
      CHECK(wsum == Catch::Approx(2.0).epsilon(1e-14));
      const int degree = 2 * m - 1;
      double integral = 0.0;
      for (int i = 0; i < m; ++i) {
        integral += r.weights[i] * std::pow(r.nodes[i], degree - 1);
      }
      // even degree-1 moment: 2/(degree)
      CHECK(integral == Catch::Approx(2.0 / degree).margin(1e-13));
    }
  }
}

TEST_CASE("adaptive integration") {
  SECTION("smooth integrand") {
    const double v = adaptive_integrate([](double t) { return std::sin(t); },
                                        0.0, std::numbers::pi, 1e-13);
    CHECK(v == Catch::Approx(2.0).epsilon(1e-13));
  }

  SECTION("kinked integrand meets a tight tolerance") {
    const double c = 1.0 / 3.0;
    const double v = adaptive_integrate(
        [c](double t) { return std::abs(t - c); }, 0.0, 1.0, 1e-13);
    const double exact = 0.5 * (c * c + (1 - c) * (1 - c));
    CHECK(v == Catch::Approx(exact).epsilon(1e-12));
  }

  SECTION("budget exhaustion raises") {
    CHECK_THROWS_AS(adaptive_integrate([](double t) { return std::sin(1.0 / t); },
                                       1e-9, 1.0, 1e-13, 8),
                    QuadratureNonConvergence);
  }
}

TEST_CASE("quadrature spec validation") {
  CHECK_NOTHROW(validate_quadrature({}));
  QuadratureSpec bad_order;
  bad_order.order = 1;
  CHECK_THROWS_AS(validate_quadrature(bad_order), InvalidQuadrature);
  QuadratureSpec bad_tol;
  bad_tol.rel_tol = 1e-2;
  CHECK_THROWS_AS(validate_quadrature(bad_tol), InvalidQuadrature);
}
