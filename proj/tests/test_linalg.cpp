#include <catch2/catch_amalgamated.hpp>

#include "semor/linalg.hpp"
#include "test_support.hpp"

using namespace semor;
using semor::testing::lyapunov_kron_oracle;
using semor::testing::random_mat;
using semor::testing::random_stable;

namespace {

// greedy complex multiset match, returns the largest pairing distance
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (const Complex& x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double d = std::abs(x - b[i]);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        worst = std::max(worst, best);
        b.erase(b.begin() + best_i);
    }
    return worst;
}

} // namespace

TEST_CASE("lu_factor solves identity and diagonal systems", "[linalg]") {
    Mat eye = Mat::Identity(3, 3);
    LuReal lu(eye);
    Vec b(3);
    b << 1, 2, 3;
    REQUIRE(max_abs(Mat(lu.solve(b) - b)) == 0.0);

    Mat diag = Vec(Vec(2) << 2, 4).finished().asDiagonal();
    LuReal lud(diag);
    Vec b2(2);
    b2 << 2, 4;
    REQUIRE(max_abs(Mat(lud.solve(b2) - Vec::Ones(2))) < 1e-15);
}

TEST_CASE("lu_factor residual on random well-conditioned systems", "[linalg]") {
    std::mt19937_64 rng(7);
    const Mat m = random_mat(rng, 8, 8) + 10.0 * Mat::Identity(8, 8);
    const Vec b = random_mat(rng, 8, 1);
    LuReal lu(m);
    const Vec x = lu.solve(b);
    REQUIRE(max_abs(Mat(m * x - b)) < 1e-10 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("lu_factor handles the sparse path and flags singular matrices", "[linalg]") {
    // tridiagonal, 600 > dense fallback limit
    const Index n = 600;
    std::vector<Eigen::Triplet<double>> ts;
    for (Index i = 0; i < n; ++i) {
        ts.emplace_back(i, i, 4.0);
        if (i + 1 < n) {
            ts.emplace_back(i, i + 1, -1.0);
            ts.emplace_back(i + 1, i, -1.0);
        }
    }
    SpMat m(n, n);
    m.setFromTriplets(ts.begin(), ts.end());
    LuReal lu(m);
    const Mat b = Mat::Ones(n, 1);
    REQUIRE(max_abs(Mat(m * lu.solve(b) - b)) < 1e-9);

    Mat singular = Mat::Zero(3, 3);
    singular(0, 0) = 1.0;
    REQUIRE_THROWS_AS(LuReal(singular), SingularMatrixError);

    SpMat sp_singular(600, 600);  // all-zero sparse
    REQUIRE_THROWS_AS(LuReal(sp_singular), SingularMatrixError);
}

TEST_CASE("orthonormalize keeps orthonormal input and reports deflation", "[linalg]") {
    Mat q = Mat::Identity(5, 3);
    Orthonormalized o = orthonormalize(q);
    REQUIRE(o.deflation_free());
    REQUIRE(max_abs(Mat(o.q.cwiseAbs() - q)) < 1e-14);
    REQUIRE(max_abs(Mat(o.t.cwiseAbs() - Mat::Identity(3, 3))) < 1e-14);

    Mat v = Mat::Zero(4, 2);
    v(0, 0) = 1.0;
    v(0, 1) = 2.0;  // second column parallel to the first
    Orthonormalized od = orthonormalize(v);
    REQUIRE(od.q.cols() == 1);
    REQUIRE(od.deflated == std::vector<Index>{1});
}

TEST_CASE("orthonormalize invariants on random tall matrices", "[linalg]") {
    std::mt19937_64 rng(11);
    const Mat v = random_mat(rng, 20, 4);
    Orthonormalized o = orthonormalize(v);
    REQUIRE(o.deflation_free());
    REQUIRE(max_abs(Mat(o.q.transpose() * o.q - Mat::Identity(4, 4))) < 1e-12);
    REQUIRE(max_abs(Mat(o.q * o.t - v)) < 1e-10 * max_abs(v));
    // t upper triangular
    for (Index i = 0; i < o.t.rows(); ++i)
        for (Index j = 0; j < i; ++j)
            REQUIRE(o.t(i, j) == 0.0);
}

TEST_CASE("solve_lyapunov_small hand cases", "[linalg]") {
    Mat a(1, 1), q(1, 1);
    a << -1.0;
    q << 2.0;
    REQUIRE(solve_lyapunov_small(a, q)(0, 0) == Catch::Approx(1.0).margin(1e-14));

    REQUIRE(max_abs(Mat(solve_lyapunov_small(-Mat::Identity(2, 2), Mat::Identity(2, 2)) -
                        0.5 * Mat::Identity(2, 2))) < 1e-14);
}

TEST_CASE("solve_lyapunov_small: residual, symmetry, definiteness", "[linalg]") {
    std::mt19937_64 rng(23);
    const Mat a = random_stable(rng, 5);
    const Mat g = random_mat(rng, 5, 5);
    const Mat q = g * g.transpose();  // PSD
    const Mat x = solve_lyapunov_small(a, q);

    const double scale = max_abs(a) * max_abs(x) + max_abs(q);
    REQUIRE(max_abs(Mat(a * x + x * a.transpose() + q)) < 1e-10 * scale);
    REQUIRE(max_abs(Mat(x - x.transpose())) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    REQUIRE(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("solve_lyapunov_small agrees with the Kronecker oracle", "[linalg]") {
    for (unsigned seed : {1u, 2u, 3u}) {
        std::mt19937_64 rng(seed);
        const Index n = 6;
        const Mat a = random_stable(rng, n);
        const Mat q = random_mat(rng, n, n);
        const Mat x = solve_lyapunov_small(a, q);
        const Mat x_oracle = lyapunov_kron_oracle(a, q);
        REQUIRE(max_abs(Mat(x - x_oracle)) < 1e-9 * std::max(1.0, max_abs(x_oracle)));
    }
}

TEST_CASE("solve_lyapunov_small rejects overlapping spectra", "[linalg]") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;  // 1 + (-1) = 0
    REQUIRE_THROWS_AS(solve_lyapunov_small(a, Mat::Identity(2, 2)), NonUniqueSolutionError);
}

TEST_CASE("eigenvalues_dense on plain matrices and singular descriptors", "[linalg]") {
    Mat a = Vec(Vec(2) << -1, -2).finished().asDiagonal();
    Spectrum s = eigenvalues_dense(a);
    REQUIRE(multiset_distance(s.finite, {Complex(-1, 0), Complex(-2, 0)}) < 1e-12);

    // pencil with one infinite eigenvalue
    Mat e = Mat::Zero(2, 2);
    e(0, 0) = 1.0;
    Spectrum sp = eigenvalues_dense(Mat::Identity(2, 2), e);
    REQUIRE(sp.infinite_count == 1);
    REQUIRE(sp.finite.size() == 1);
    REQUIRE(std::abs(sp.finite[0] - Complex(1, 0)) < 1e-12);

    REQUIRE_THROWS_AS(eigenvalues_dense(Mat::Zero(2, 2), Mat::Zero(2, 2)), SingularPencilError);
}

TEST_CASE("eigenvalues_dense shift property", "[linalg]") {
    std::mt19937_64 rng(31);
    const Mat a = random_mat(rng, 10, 10);
    const double shift = 3.25;
    Spectrum base = eigenvalues_dense(a);
    Spectrum shifted = eigenvalues_dense(Mat(a + shift * Mat::Identity(10, 10)));
    for (Complex& l : base.finite) l += shift;
    REQUIRE(multiset_distance(base.finite, shifted.finite) < 1e-9);
}
