#include "gradhom/errors.hpp"
#include "gradhom/scaling.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gradhom;

TEST_SUITE("scaling") {

TEST_CASE("tensor maxima") {
    const CellGrid g(2, 8);
    // |K|_F = 3 needs c sqrt(d^2) = 3 for the identity action, |A|_F = 0.25 needs eta sqrt(d^3) = 0.25
    const auto f = constant_field(g, make_material(make_identity_K(1.5, 2), make_diagonal_A(0.25 / std::sqrt(8.0), 2)));
    const auto m = tensor_maxima(f);
    CHECK(m.calK == doctest::Approx(3.0));
    CHECK(m.calS == 0.0);
    CHECK(m.calA == doctest::Approx(0.25));

    const CellGrid g1(1, 16);
    const auto lam = laminate(g1, 0, 0.5, make_material(make_identity_K(1.0, 1), make_diagonal_A(1.0, 1)),
                              make_material(make_identity_K(4.0, 1), make_diagonal_A(1.0, 1)));
    CHECK(tensor_maxima(lam).calK == 4.0);

    auto chiral = lam;
    const double amp = 0.7;
    chiral.set_S(chiral_S(g1, amp, 1));
    double scan = 0.0;
    for (size_t n = 0; n < g1.num_nodes(); ++n)
        scan = std::max(scan, std::abs(amp * std::sin(2 * M_PI * g1.coord(static_cast<int>(n)))));
    CHECK(tensor_maxima(chiral).calS == doctest::Approx(scan).epsilon(1e-14));
}

TEST_CASE("intrinsic lengths") {
    auto a = intrinsic_lengths(1.0, 0.0, 1e-4, 2.0, 2.0);
    CHECK(a.ell_SG == doctest::Approx(1e-2));
    CHECK(a.ell_chiral == 0.0);
    auto b = intrinsic_lengths(1.0, 1e-3, 1e-4, 2.0, 2.0);
    CHECK(b.ell_SG == doctest::Approx(1e-2));
    CHECK(b.ell_chiral == doctest::Approx(1e-4));
    CHECK_THROWS_AS(intrinsic_lengths(1.0, 1e-3, 0.0, 2.0, 2.0), ConsistencyError);
    CHECK_THROWS_AS(intrinsic_lengths(1.0, 0.0, 1.0, 3.0, 2.0), ConfigError);
    CHECK_THROWS_AS(intrinsic_lengths(0.0, 0.0, 1.0, 2.0, 2.0), InvalidMaterial);
    auto c = intrinsic_lengths(2.0, 0.0, 0.0, 2.0, 2.0);
    CHECK(c.ell_SG == 0.0);
    CHECK(c.ell_chiral == 0.0);
}

TEST_CASE("lengths invert back to the maxima") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4.0, 1.0), v(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double calK = std::pow(10.0, u(rng)), calA = std::pow(10.0, u(rng)), calS = std::pow(10.0, u(rng));
        const double p = 1.0 + std::pow(10.0, v(rng));
        const double q = p / (p - 1.0);
        const auto len = intrinsic_lengths(calK, calS, calA, p, q);
        CHECK(calK * len.ell_SG * len.ell_SG == doctest::Approx(calA).epsilon(1e-12));
        CHECK(calK * std::pow(len.ell_SG, 1.0 / p) * std::pow(len.ell_chiral, 1.0 / q) ==
              doctest::Approx(calS).epsilon(1e-12));
    }
}

TEST_CASE("regime classification") {
    CHECK(classify_regime(0.1, 1e-3, 0.1, 2.0) == Regime::HS1);
    CHECK(classify_regime(1.0, 1e-2, 0.1, 2.0) == Regime::HS2);
    CHECK(classify_regime(0.2, 0.0, 0.01, 2.0) == Regime::Other);
    CHECK(classify_regime(0.0, 0.0, 0.1, 2.0) == Regime::Other);
    // no chirality: only the second-gradient band decides
    CHECK(classify_regime(0.1, 0.0, 0.1, 2.0) == Regime::HS1);
    CHECK(classify_regime(1.0, 0.0, 0.1, 2.0) == Regime::HS2);
    CHECK_THROWS_AS(classify_regime(0.1, 0.0, 1.5, 2.0), ConfigError);
}

TEST_CASE("HS1 classification survives a common rescaling inside the band") {
    const double eps = 0.05;
    const double ell = 0.06, chi = std::pow(eps, 3.0) * 1.2;
    REQUIRE(classify_regime(ell, chi, eps, 2.0) == Regime::HS1);
    for (double f : {0.8, 1.1, 1.25})
        CHECK(classify_regime(ell * f, chi * std::pow(f, 3.0), eps * f, 2.0) == Regime::HS1);
}

TEST_CASE("chiral length is an order below the second-gradient length") {
    for (double eps : {0.2, 0.1, 0.01})
        for (double q : {1.5, 2.0, 3.0}) {
            CHECK(std::pow(eps, q + 1.0) <= eps * eps);
            CHECK(std::pow(eps, q) <= eps);
        }
}

TEST_CASE("multipliers") {
    const auto h1 = regime_multipliers(Regime::HS1);
    CHECK(h1.s_in_sigma == 2.0);
    CHECK(h1.a_in_mu == 2.0);
    CHECK(h1.s_in_mu == 2.0);
    const auto h2 = regime_multipliers(Regime::HS2);
    CHECK(h2.s_in_sigma == 1.0);
    CHECK(h2.a_in_mu == 0.0);
    CHECK(h2.s_in_mu == 1.0);
    CHECK_THROWS_AS(regime_multipliers(Regime::Other), UnsupportedRegime);
    CHECK(parse_regime("HS2") == Regime::HS2);
    CHECK_THROWS_AS(parse_regime("hs3"), ConfigError);
}

TEST_CASE("scale report on a field") {
    const CellGrid g(1, 16);
    // calK = 1, calA = eps^2 at eps = 0.1
    const auto f = constant_field(g, make_material(make_identity_K(1.0, 1), make_diagonal_A(0.01, 1)));
    const auto r = scale_report(f, 0.1);
    CHECK(r.ell_SG == doctest::Approx(0.1));
    CHECK(r.regime == Regime::HS1);
    CHECK(scale_report(f, 0.001).regime == Regime::Other);
}

} // TEST_SUITE
