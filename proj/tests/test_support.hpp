#pragma once

#include <random>

#include "semor/model.hpp"

// Helpers shared by the test suites: deterministic random systems and the
// independent oracles (Kronecker-vectorization Lyapunov solve, quadrature H2
// norm). Everything here is intentionally separate from the library's own
// computation paths.

namespace semor::testing {

inline Mat random_mat(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = dist(rng);
    return m;
}

/// Dense matrix with A + A' < 0 (skew part plus a strictly negative definite
/// symmetric part).
inline Mat random_strictly_dissipative(std::mt19937_64& rng, Index n, double margin = 0.5) {
    const Mat m = random_mat(rng, n, n);
    const Mat s = random_mat(rng, n, n);
    return 0.5 * (s - s.transpose()) - m.transpose() * m - margin * Mat::Identity(n, n);
}

/// Stable dense matrix (eigenvalues in the open left half-plane).
inline Mat random_stable(std::mt19937_64& rng, Index n, double margin = 0.5) {
    return random_strictly_dissipative(rng, n, margin);
}

struct RandomDaeOptions {
    Index n_dyn = 10;
    Index n_alg = 15;
    Index num_inputs = 1;
    Index num_outputs = 1;
    bool with_b22 = true;
    bool with_c22 = true;
    bool with_d = false;
    bool strictly_dissipative_form = true;  ///< false: stable but scrambled rows
    double margin = 0.5;
};

/// Random stable SE-DAE. The full A satisfies A + A' < 0, which makes a22
/// invertible and the underlying ODE strictly dissipative; e11 is SPD. With
/// strictly_dissipative_form = false the dynamic rows are multiplied by a
/// random invertible matrix, which preserves the transfer function and
/// stability but destroys the dissipative realization.
inline SemiExplicitDae random_sedae(unsigned seed, const RandomDaeOptions& opts = {}) {
    std::mt19937_64 rng(seed);
    const Index nd = opts.n_dyn, na = opts.n_alg;
    const Index n = nd + na;
    Mat a = random_strictly_dissipative(rng, n, opts.margin);
    Mat g = random_mat(rng, nd, nd, 0.3);
    Mat e11 = g * g.transpose() + Mat::Identity(nd, nd);

    Mat b11 = random_mat(rng, nd, opts.num_inputs);
    Mat b22 = opts.with_b22 ? random_mat(rng, na, opts.num_inputs) : Mat::Zero(na, opts.num_inputs);
    Mat c11 = random_mat(rng, opts.num_outputs, nd);
    Mat c22 = opts.with_c22 ? random_mat(rng, opts.num_outputs, na) : Mat::Zero(opts.num_outputs, na);
    Mat d = opts.with_d ? random_mat(rng, opts.num_outputs, opts.num_inputs) : Mat::Zero(opts.num_outputs, opts.num_inputs);

    Mat a11 = a.topLeftCorner(nd, nd);
    Mat a12 = a.topRightCorner(nd, na);
    if (!opts.strictly_dissipative_form) {
        const Mat q = random_mat(rng, nd, nd, 0.2) + 2.0 * Mat::Identity(nd, nd);
        e11 = (q * e11).eval();
        a11 = (q * a11).eval();
        a12 = (q * a12).eval();
        b11 = (q * b11).eval();
    }

    return SemiExplicitDae(e11.sparseView(), a11.sparseView(), a12.sparseView(),
                           a.bottomLeftCorner(na, nd).sparseView(),
                           a.bottomRightCorner(na, na).sparseView(),
                           b11, b22, c11, c22, d);
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

inline Mat kron(const Mat& a, const Mat& b) {
    Mat k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

/// Independent Lyapunov solve by full Kronecker vectorization of
/// a x + x a' + q = 0 (dims <= ~20).
inline Mat lyapunov_kron_oracle(const Mat& a, const Mat& q) {
    const Index n = a.rows();
    const Mat eye = Mat::Identity(n, n);
    const Mat sys = kron(eye, a) + kron(a, eye);
    Vec rhs = -Eigen::Map<const Vec>(q.data(), n * n);
    Vec x = sys.fullPivLu().solve(rhs);
    return Eigen::Map<const Mat>(x.data(), n, n);
}

/// Quadrature H2 norm oracle: ||G||^2 = (1/pi) int_0^inf ||G(iw)||_F^2 dw,
/// computed with composite Simpson after the substitution w = tan(theta).
template <typename System>
double h2_norm_quadrature(const System& sys, Index panels = 40000) {
    const Index n = 2 * panels;  // Simpson needs an even count of intervals
    const double h = (M_PI / 2.0) / double(n);
    auto f = [&](double theta) -> double {
        if (theta >= M_PI / 2.0) return 0.0;  // integrand decays like 1/w^2
        const double w = std::tan(theta);
        const double sec2 = 1.0 + w * w;
        const CMat g = transfer_eval(sys, Complex(0.0, w));
        return g.squaredNorm() * sec2;
    };
    double acc = f(0.0) + f(M_PI / 2.0);
    for (Index i = 1; i < n; ++i)
        acc += f(double(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return std::sqrt(acc * h / 3.0 / M_PI);
}

} // namespace semor::testing
