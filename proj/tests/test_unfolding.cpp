#include "gradhom/errors.hpp"
#include "gradhom/unfolding.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace gradhom;

namespace {

std::vector<double> random_values(size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double &x : v)
        x = u(rng);
    return v;
}

} // namespace

TEST_SUITE("unfolding") {

TEST_CASE("domain decomposition") {
    const auto g1 = MacroGrid::from_spacing(1, 1.0 / 16, 0.25);
    const auto d1 = decompose_domain(g1);
    CHECK(d1.cells.size() == 4);
    CHECK(d1.lambda.empty());
    CHECK(d1.nodes_per_cell == 4);

    const auto d2 = decompose_domain(MacroGrid(2, 12, 4));
    CHECK(d2.cells.size() == 9);
    CHECK(d2.lambda.empty());

    CHECK_THROWS_AS(MacroGrid::from_spacing(1, 1.0 / 16, 0.3), AlignmentError);
    CHECK_THROWS_AS(MacroGrid(1, 4, 8), AlignmentError);
}

TEST_CASE("nodes map back to themselves") {
    const MacroGrid g(2, 12, 4);
    std::vector<int> hits(g.num_fine(), 0);
    for (size_t cell = 0; cell < g.num_cells(); ++cell)
        for (size_t j = 0; j < g.num_y(); ++j) {
            const size_t node = g.fine_index(cell, j);
            ++hits[node];
            CHECK(g.cell_of(node) == static_cast<std::int64_t>(cell));
            // x = eps (l + 1/2 + y)
            const auto x = g.fine_point(node), y = g.y_point(j);
            const size_t l0 = cell / 3, l1 = cell % 3;
            CHECK(x[0] == doctest::Approx(g.eps() * (l0 + 0.5 + y[0])).epsilon(1e-15));
            CHECK(x[1] == doctest::Approx(g.eps() * (l1 + 0.5 + y[1])).epsilon(1e-15));
        }
    for (int h : hits)
        CHECK(h == 1);
}

TEST_CASE("unfold examples") {
    const auto g = MacroGrid::from_spacing(1, 1.0 / 16, 0.25);
    const auto c = unfold(std::vector<double>(16, 2.5), g);
    for (double v : c.values)
        CHECK(v == 2.5);

    // phi(x) = psi(x / eps) with psi sampled on the y-grid
    std::vector<double> periodic(16);
    for (int m = 0; m < 16; ++m)
        periodic[m] = static_cast<double>((m % 4) * (m % 4)) - 1.0;
    const auto p = unfold(periodic, g, 2);
    for (size_t cell = 1; cell < g.num_cells(); ++cell)
        for (size_t j = 0; j < g.num_y(); ++j)
            CHECK(p.at(cell, j) == p.at(0, j));

    std::vector<double> indicator(16, 0.0);
    for (int m = 8; m < 12; ++m)
        indicator[m] = 1.0;
    const auto ind = unfold(indicator, g);
    for (size_t cell = 0; cell < g.num_cells(); ++cell)
        for (size_t j = 0; j < g.num_y(); ++j)
            CHECK(ind.at(cell, j) == (cell == 2 ? 1.0 : 0.0));

    CHECK_THROWS_AS(unfold(std::vector<double>(15, 0.0), g), DimensionMismatch);
}

TEST_CASE("integral identity") {
    const auto g = MacroGrid::from_spacing(1, 1.0 / 16, 0.25);
    const auto one = integral_identity_check(std::vector<double>(16, 1.0), g);
    CHECK(one.lhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.rhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.defect <= 1e-14);

    std::mt19937_64 rng(9);
    for (int d = 1; d <= 3; ++d) {
        const MacroGrid gd(d, d == 3 ? 12 : 24, d == 3 ? 3 : 4);
        const auto r = integral_identity_check(random_values(gd.num_fine(), rng), gd);
        CHECK(r.defect <= 1e-13 * r.l1_norm);
    }
}

TEST_CASE("non-aligned grid keeps the trailing nodes in Lambda") {
    // h = 1/64, eps = 20/64: three full cells, four trailing nodes
    const auto g = MacroGrid::from_spacing(1, 1.0 / 64, 20.0 / 64);
    CHECK_FALSE(g.aligned());
    const auto dec = decompose_domain(g);
    CHECK(dec.cells.size() == 3);
    REQUIRE(dec.lambda.size() == 4);
    CHECK(dec.lambda.front() == 60);

    std::vector<double> on_lambda(64, 0.0);
    for (size_t n : dec.lambda)
        on_lambda[n] = 1.0;
    const auto r = integral_identity_check(on_lambda, g);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.l1_norm > 0.0);

    std::mt19937_64 rng(10);
    const auto phi = random_values(64, rng);
    CHECK(integral_identity_check(phi, g).defect <= 1e-13 * integral_identity_check(phi, g).l1_norm);
}

TEST_CASE("product and norm") {
    const MacroGrid g(2, 16, 4);
    std::mt19937_64 rng(12);
    const auto a = random_values(g.num_fine(), rng), b = random_values(g.num_fine(), rng);
    const auto r = product_and_norm_checks(a, b, g);
    CHECK(r.product_exact);
    CHECK(r.norm_bounded);
    CHECK(r.unfolded_norm == doctest::Approx(r.source_norm).epsilon(1e-13));

    const auto c = product_and_norm_checks(std::vector<double>(g.num_fine(), 3.0),
                                           std::vector<double>(g.num_fine(), -2.0), g);
    CHECK(c.product_exact);
    CHECK(c.unfolded_norm == doctest::Approx(3.0));

    std::vector<double> i1(g.num_fine(), 0.0), i2(g.num_fine(), 0.0);
    i1[5] = 1.0;
    i2[5] = 1.0;
    i2[6] = 1.0;
    const auto ind = product_and_norm_checks(i1, i2, g);
    CHECK(ind.product_exact);
    CHECK(ind.norm_bounded);

    // with a nonempty Lambda the unfolded norm only sees full cells
    const MacroGrid na(1, 10, 3);
    std::vector<double> tail(10, 0.0);
    tail[9] = 1.0;
    tail[0] = 1.0;
    const auto t = product_and_norm_checks(tail, tail, na);
    CHECK(t.norm_bounded);
    CHECK(t.unfolded_norm < t.source_norm);
}

TEST_CASE("reindexing preserves the value multiset and is linear") {
    const MacroGrid g(3, 12, 3);
    std::mt19937_64 rng(13);
    const auto a = random_values(g.num_fine(), rng), b = random_values(g.num_fine(), rng);
    auto Ta = unfold(a, g, 3).values;
    auto src = a;
    std::sort(Ta.begin(), Ta.end());
    std::sort(src.begin(), src.end());
    CHECK(Ta == src);

    const double alpha = 0.75, beta = -1.5;
    std::vector<double> mix(a.size());
    for (size_t i = 0; i < a.size(); ++i)
        mix[i] = alpha * a[i] + beta * b[i];
    const auto Tm = unfold(mix, g), Ua = unfold(a, g), Ub = unfold(b, g);
    for (size_t i = 0; i < Tm.values.size(); ++i)
        CHECK(Tm.values[i] == alpha * Ua.values[i] + beta * Ub.values[i]);
}

TEST_CASE("two-scale probe") {
    const auto sine = [](const Point &y) { return std::sin(2 * M_PI * y[0]); };
    const auto one = [](const Point &) { return 1.0; };
    for (const auto &row : two_scale_convergence_probe(one, sine, {0.25, 0.125, 0.0625}, 1, 16))
        CHECK(row.error <= 1e-12);

    const auto x = [](const Point &p) { return p[0]; };
    const auto rows = two_scale_convergence_probe(x, sine, {0.25, 0.125, 0.0625}, 1, 16);
    CHECK(strictly_decreasing(rows));
    for (size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].error / rows[i - 1].error == doctest::Approx(0.5).epsilon(0.1));
    CHECK(rows.back().error < rows.front().error);

    const auto rows2 = two_scale_convergence_probe(
        [](const Point &p) { return std::exp(p[0] + p[1]); },
        [](const Point &y) { return std::cos(2 * M_PI * y[0]) * std::sin(2 * M_PI * y[1]); }, {0.25, 0.125}, 2, 8);
    CHECK(strictly_decreasing(rows2));
}

TEST_CASE("Hessian compatibility probe") {
    const auto u = [](const Point &x) { return std::sin(M_PI * x[0]) + x[1] * x[1]; };
    const auto W = [](const Point &y) { return std::cos(2 * M_PI * y[0]) + 0.5 * std::sin(2 * M_PI * y[1]); };
    CHECK(strictly_decreasing(hessian_compatibility_probe(u, W, {0.25, 0.125, 0.0625}, 1, 16)));
    CHECK(strictly_decreasing(hessian_compatibility_probe(u, W, {0.25, 0.125, 0.0625}, 2, 8)));
    CHECK_FALSE(strictly_decreasing({{0.5, 1.0}, {0.25, 1.0}}));
}

} // TEST_SUITE
