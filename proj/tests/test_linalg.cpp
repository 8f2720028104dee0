#include <catch2/catch_amalgamated.hpp>

#include <zsl/linalg.hpp>
#include <zsl/rng.hpp>

#include "testutil.hpp"

#include <cmath>

using zsl::Matrix;

TEST_CASE("svd of identity has unit singular values") {
    auto d = zsl::svd(Matrix::identity(3));
    REQUIRE(d.sigma.size() == 3);
    for (double s : d.sigma) CHECK(s == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("svd of a diagonal matrix returns the diagonal, sorted") {
    Matrix m(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 2.0;
    auto d = zsl::svd(m);
    CHECK(d.sigma[0] == Catch::Approx(3.0).margin(1e-12));
    CHECK(d.sigma[1] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("svd of rank-1 [[1,1],[0,0]] gives sigma (sqrt2, 0)") {
    Matrix m(2, 2, {1.0, 1.0, 0.0, 0.0});
    auto d = zsl::svd(m);
    CHECK(d.sigma[0] == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    CHECK(d.sigma[1] == Catch::Approx(0.0).margin(1e-12));
    auto c = testutil::check_svd(m);
    CHECK(c.reconstruction_error <= 1e-10);
    CHECK(c.u_orthogonality <= 1e-10);
    CHECK(c.v_orthogonality <= 1e-10);
}

TEST_CASE("svd rejects non-finite and empty input") {
    Matrix bad(1, 2, {1.0, std::nan("")});
    CHECK_THROWS(zsl::svd(bad));
    CHECK_THROWS(zsl::svd(Matrix()));
}

TEST_CASE("svd properties hold on random matrices up to 20x20") {
    zsl::Rng rng(20240801u);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t r = 1 + rng.below(20);
        const std::size_t c = 1 + rng.below(20);
        const double scale = trial % 3 == 0 ? 100.0 : 1.0;
        Matrix m = testutil::random_matrix(rng, r, c, scale);
        if (trial % 7 == 0) {
            // plant rank deficiency: duplicate a column
            if (c >= 2)
                for (std::size_t i = 0; i < r; ++i) m(i, c - 1) = m(i, 0);
        }
        auto chk = testutil::check_svd(m);
        REQUIRE(chk.reconstruction_error <= 1e-10);
        REQUIRE(chk.u_orthogonality <= 1e-10);
        REQUIRE(chk.v_orthogonality <= 1e-10);
        REQUIRE(chk.sigma_sorted);
        REQUIRE(chk.sigma_nonnegative);
    }
}

TEST_CASE("solve_right_factor with identity signatures returns w") {
    zsl::Rng rng(7u);
    Matrix w = testutil::random_matrix(rng, 4, 3);
    Matrix v = zsl::solve_right_factor(w, Matrix::identity(3));
    for (std::size_t i = 0; i < w.data.size(); ++i)
        CHECK(v.data[i] == Catch::Approx(w.data[i]).margin(1e-12));
}

TEST_CASE("solve_right_factor with zero w returns zero") {
    Matrix w(2, 2, 0.0);
    Matrix s(3, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0});
    Matrix v = zsl::solve_right_factor(w, s);
    for (double x : v.data) CHECK(x == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("solve_right_factor inverts a 2x2 signature exactly") {
    // S = [[1,1],[0,1]], W = [[2,3]]  =>  V = W S^-1 = [[2,1]]
    Matrix w(1, 2, {2.0, 3.0});
    Matrix s(2, 2, {1.0, 1.0, 0.0, 1.0});
    Matrix v = zsl::solve_right_factor(w, s);
    CHECK(v(0, 0) == Catch::Approx(2.0).margin(1e-10));
    CHECK(v(0, 1) == Catch::Approx(1.0).margin(1e-10));
    CHECK(testutil::factor_residual(v, s, w) <= 1e-10);
}

TEST_CASE("solve_right_factor of an all-zero signature returns zero, not an error") {
    Matrix w(2, 3, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    Matrix s(4, 3, 0.0);
    Matrix v = zsl::solve_right_factor(w, s);
    REQUIRE(v.rows == 2);
    REQUIRE(v.cols == 4);
    for (double x : v.data) CHECK(x == 0.0);
}

TEST_CASE("solve_right_factor rejects dimension mismatch") {
    CHECK_THROWS(zsl::solve_right_factor(Matrix(2, 3, 1.0), Matrix(4, 2, 1.0)));
    CHECK_THROWS(zsl::solve_right_factor(Matrix(2, 3, 1.0), Matrix()));
}

TEST_CASE("solve_right_factor residual is zero when signatures have full column rank") {
    zsl::Rng rng(99u);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t z = 2 + rng.below(4);
        const std::size_t a = z + rng.below(5); // a >= z
        const std::size_t d = 1 + rng.below(6);
        Matrix s = testutil::random_matrix(rng, a, z);
        Matrix w = testutil::random_matrix(rng, d, z);
        Matrix v = zsl::solve_right_factor(w, s);
        const double wn = zsl::frobenius_norm(w);
        REQUIRE(testutil::factor_residual(v, s, w) <= 1e-8 * (wn > 0 ? wn : 1.0));
    }
}

TEST_CASE("solve_right_factor beats random perturbations") {
    zsl::Rng rng(123u);
    Matrix s = testutil::random_matrix(rng, 3, 5); // wide: least squares, nonzero residual
    Matrix w = testutil::random_matrix(rng, 4, 5);
    Matrix v = zsl::solve_right_factor(w, s);
    const double base = testutil::factor_residual(v, s, w);
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix pert = v;
        for (double& x : pert.data) x += (2.0 * rng.uniform() - 1.0) * 1e-3;
        REQUIRE(testutil::factor_residual(pert, s, w) >= base - 1e-12);
    }
}

TEST_CASE("softmax matches hand-computed values") {
    auto w = zsl::softmax({0.0, 0.0});
    CHECK(w[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(w[1] == Catch::Approx(0.5).margin(1e-15));

    auto single = zsl::softmax({42.0});
    CHECK(single[0] == 1.0);

    // e/(e+1) = 0.731058578630005, 1/(e+1) = 0.268941421369995
    auto pair = zsl::softmax({1.0, 0.0});
    CHECK(pair[0] == Catch::Approx(0.731058578630005).margin(1e-6));
    CHECK(pair[1] == Catch::Approx(0.268941421369995).margin(1e-6));
}

TEST_CASE("softmax sums to one, preserves order, ignores constant shifts") {
    zsl::Rng rng(5150u);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        std::vector<double> s(n);
        for (double& x : s) x = (2.0 * rng.uniform() - 1.0) * 50.0;
        auto w = zsl::softmax(s);

        double sum = 0.0;
        for (double x : w) sum += x;
        REQUIRE(std::abs(sum - 1.0) <= 1e-12);

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (s[i] > s[j]) REQUIRE(w[i] > w[j]);

        const double shift = (2.0 * rng.uniform() - 1.0) * 100.0;
        std::vector<double> shifted = s;
        for (double& x : shifted) x += shift;
        auto w2 = zsl::softmax(shifted);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(w2[i] - w[i]) <= 1e-12);
    }
}

TEST_CASE("softmax rejects empty and non-finite input") {
    CHECK_THROWS(zsl::softmax({}));
    CHECK_THROWS(zsl::softmax({1.0, std::numeric_limits<double>::infinity()}));
}

TEST_CASE("softmax stays finite for extreme scores") {
    auto w = zsl::softmax({1000.0, -1000.0, 999.0});
    double sum = 0.0;
    for (double x : w) {
        REQUIRE(std::isfinite(x));
        sum += x;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
}
