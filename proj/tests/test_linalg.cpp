#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "berlin/linalg.hpp"
#include "berlin/rng.hpp"

using namespace berlin;
using namespace berlin::linalg;

namespace {

SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    SymMatrix m(rows.size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (const double v : row) m.at(i, j++) = v;
        ++i;
    }
    return m;
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j < a.dim(); ++j) {
            m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("rank1_add examples") {
    CHECK(max_abs_diff(rank1_add(SymMatrix::identity(2), {1, 0}),
                       from_rows({{2, 0}, {0, 1}})) == 0.0);
    CHECK(max_abs_diff(rank1_add(SymMatrix::identity(2), {0, 0}),
                       SymMatrix::identity(2)) == 0.0);
    CHECK(max_abs_diff(rank1_add(from_rows({{2, 1}, {1, 3}}), {1, 2}),
                       from_rows({{3, 3}, {3, 7}})) == 0.0);
    CHECK_THROWS_AS(rank1_add(SymMatrix::identity(2), {1, 2, 3}), DimensionError);
}

TEST_CASE("rank1_add output is bitwise symmetric") {
    RngStream rng(7, "sym");
    SymMatrix a = SymMatrix::identity(8);
    for (int it = 0; it < 50; ++it) {
        Vector x(8);
        for (auto& v : x) v = rng.uniform(-3, 3);
        rank1_add_inplace(a, x);
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                CHECK(a.at(i, j) == a.at(j, i));
            }
        }
    }
}

TEST_CASE("sherman_morrison examples") {
    CHECK(max_abs_diff(sherman_morrison(SymMatrix::identity(2), {1, 0}),
                       from_rows({{0.5, 0}, {0, 1}})) == 0.0);
    CHECK(max_abs_diff(sherman_morrison(SymMatrix::identity(2), {0, 0}),
                       SymMatrix::identity(2)) == 0.0);
    // I3 update with ones: expect I - ones/4, cross-checked against the
    // direct factorization of I + ones*ones^T.
    const Vector ones3{1, 1, 1};
    const auto via_sm = sherman_morrison(SymMatrix::identity(3), ones3);
    const auto via_chol = cholesky_inverse(rank1_add(SymMatrix::identity(3), ones3));
    CHECK(max_abs_diff(via_sm, via_chol) < 1e-12);
    SymMatrix expected(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            expected.at(i, j) = (i == j ? 1.0 : 0.0) - 0.25;
        }
    }
    CHECK(max_abs_diff(via_sm, expected) < 1e-15);
}

TEST_CASE("quad_form examples and clamping") {
    CHECK(quad_form(SymMatrix::identity(2), {3, 4}) == 25.0);
    CHECK(quad_form(from_rows({{2, 1}, {1, 3}}), {0, 0}) == 0.0);
    CHECK(quad_form(from_rows({{0.5, 0}, {0, 1}}), {2, 1}) == 3.0);
    // tiny negative rounds to zero; large negative is an error
    CHECK(quad_form(from_rows({{-1e-10}}), {1}) == 0.0);
    CHECK_THROWS_AS(quad_form(from_rows({{-1.0}}), {1}), NumericalError);
}

TEST_CASE("quad_form under identity equals squared norm") {
    RngStream rng(3, "qf");
    for (int it = 0; it < 100; ++it) {
        Vector x(12);
        double n2 = 0.0;
        for (auto& v : x) {
            v = rng.uniform(-5, 5);
            n2 += v * v;
        }
        CHECK(quad_form(SymMatrix::identity(12), x) == doctest::Approx(n2).epsilon(1e-15));
    }
}

TEST_CASE("solve_theta examples") {
    const Vector b{0.3, -2.0, 7.5};
    CHECK(solve_theta(SymMatrix::identity(3), b) == b);
    CHECK(solve_theta(from_rows({{0.5, 0}, {0, 1}}), {1, 0}) == Vector{0.5, 0});
    // theta for A = I + (1,0)(1,0)^T, b = (1,0)
    const auto a_inv = sherman_morrison(SymMatrix::identity(2), {1, 0});
    CHECK(solve_theta(a_inv, {1, 0}) == Vector{0.5, 0});
    CHECK_THROWS_AS(solve_theta(SymMatrix::identity(2), b), DimensionError);
}

TEST_CASE("cholesky_inverse examples") {
    CHECK(max_abs_diff(cholesky_inverse(SymMatrix::identity(4)),
                       SymMatrix::identity(4)) < 1e-15);
    CHECK(max_abs_diff(cholesky_inverse(from_rows({{2, 0}, {0, 4}})),
                       from_rows({{0.5, 0}, {0, 0.25}})) < 1e-15);
    CHECK(max_abs_diff(cholesky_inverse(from_rows({{2, 1}, {1, 3}})),
                       from_rows({{0.6, -0.2}, {-0.2, 0.4}})) < 1e-15);
    CHECK_THROWS_AS(cholesky_inverse(from_rows({{1, 2}, {2, 1}})), NumericalError);
}

TEST_CASE("maintained inverse tracks the direct inverse over long update runs") {
    for (const std::size_t d : {5, 20, 50}) {
        RngStream rng(100 + d, "drift");
        SymMatrix a = SymMatrix::identity(d);
        SymMatrix a_inv = SymMatrix::identity(d);
        for (int k = 0; k < 200; ++k) {
            Vector x(d);
            double n2 = 0.0;
            for (auto& v : x) {
                v = rng.uniform(-1, 1);
                n2 += v * v;
            }
            const double norm = std::sqrt(n2);
            if (norm > 10.0) {
                for (auto& v : x) v *= 10.0 / norm;
            }
            rank1_add_inplace(a, x);
            sherman_morrison_inplace(a_inv, x);
        }
        CHECK(max_abs_diff(a_inv, cholesky_inverse(a)) < 1e-8);
        // A^{-1} stays SPD: quadratic forms are nonnegative
        for (int it = 0; it < 20; ++it) {
            Vector x(d);
            for (auto& v : x) v = rng.uniform(-10, 10);
            CHECK(quad_form(a_inv, x) >= 0.0);
        }
    }
}
