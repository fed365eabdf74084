#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semor/errors.hpp"

namespace semor {

using Index   = Eigen::Index;
using Complex = std::complex<double>;

using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

using SpMat  = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<Complex>;

template <typename Scalar>
using DenseMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMat = Eigen::SparseMatrix<Scalar>;

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double max_abs(const CMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

template <typename Scalar>
double max_abs(const SparseMat<Scalar>& m) {
    double v = 0.0;
    for (Index k = 0; k < m.outerSize(); ++k)
        for (typename SparseMat<Scalar>::InnerIterator it(m, k); it; ++it)
            v = std::max(v, std::abs(it.value()));
    return v;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

// ---------------------------------------------------------------------------
// LU factorization
// ---------------------------------------------------------------------------

/// LU factors of a square real or complex matrix. Sparse inputs below
/// `dense_fallback_dim` are factorized densely; larger ones go through
/// SparseLU. Near-singularity is flagged with a relative threshold of 1e-13.
template <typename Scalar>
class LuFactors {
public:
    static constexpr Index dense_fallback_dim = 500;
    static constexpr double pivot_rtol = 1e-13;

    explicit LuFactors(const SparseMat<Scalar>& m) {
        if (m.rows() != m.cols())
            throw DimensionMismatchError("lu_factor: matrix must be square");
        n_ = m.rows();
        if (n_ < dense_fallback_dim) {
            init_dense(DenseMat<Scalar>(m));
        } else {
            sparse_ = std::make_unique<Eigen::SparseLU<SparseMat<Scalar>>>();
            SparseMat<Scalar> mc = m;
            mc.makeCompressed();
            sparse_->compute(mc);
            if (sparse_->info() != Eigen::Success)
                throw SingularMatrixError("lu_factor: sparse factorization failed (structurally or numerically singular)");
            check_sparse_conditioning(mc);
        }
    }

    explicit LuFactors(const DenseMat<Scalar>& m) {
        if (m.rows() != m.cols())
            throw DimensionMismatchError("lu_factor: matrix must be square");
        n_ = m.rows();
        init_dense(m);
    }

    Index rows() const { return n_; }

    DenseMat<Scalar> solve(const DenseMat<Scalar>& b) const {
        if (b.rows() != n_)
            throw DimensionMismatchError("LuFactors::solve: rhs row count mismatch");
        if (dense_)
            return dense_->solve(b);
        return sparse_->solve(b);
    }

private:
    void init_dense(const DenseMat<Scalar>& m) {
        dense_ = std::make_unique<Eigen::PartialPivLU<DenseMat<Scalar>>>(m);
        if (n_ == 0) return;
        Eigen::ArrayXd d = dense_->matrixLU().diagonal().cwiseAbs();
        const double dmax = d.maxCoeff();
        if (dmax == 0.0 || d.minCoeff() <= pivot_rtol * dmax)
            throw SingularMatrixError("lu_factor: pivot below threshold, matrix is singular to working precision");
    }

    // SparseLU hides its pivots; estimate ||M^-1|| with a deterministic probe
    // and flag the factorization when the blow-up exceeds the pivot threshold.
    void check_sparse_conditioning(const SparseMat<Scalar>& m) {
        DenseMat<Scalar> probe = DenseMat<Scalar>::Ones(n_, 1);
        probe /= std::sqrt(double(n_));
        DenseMat<Scalar> x = sparse_->solve(probe);
        if (!x.allFinite())
            throw SingularMatrixError("lu_factor: sparse solve produced non-finite values");
        const double growth = x.cwiseAbs().maxCoeff() * max_abs(m);
        if (growth * pivot_rtol > 1.0)
            throw SingularMatrixError("lu_factor: matrix is singular to working precision (condition estimate)");
    }

    Index n_ = 0;
    std::unique_ptr<Eigen::PartialPivLU<DenseMat<Scalar>>> dense_;
    std::unique_ptr<Eigen::SparseLU<SparseMat<Scalar>>> sparse_;
};

using LuReal    = LuFactors<double>;
using LuComplex = LuFactors<Complex>;

template <typename Scalar>
LuFactors<Scalar> lu_factor(const SparseMat<Scalar>& m) { return LuFactors<Scalar>(m); }
template <typename Scalar>
LuFactors<Scalar> lu_factor(const DenseMat<Scalar>& m) { return LuFactors<Scalar>(m); }

// ---------------------------------------------------------------------------
// Orthonormalization
// ---------------------------------------------------------------------------

/// Result of orthonormalize(): v = q * t with q'q = I. Columns whose norm
/// collapses under projection are deflated; `t` then has one row per kept
/// column (upper trapezoidal).
struct Orthonormalized {
    Mat q;                        ///< N x k orthonormal basis
    Mat t;                        ///< k x n change of basis, v = q * t
    std::vector<Index> deflated;  ///< indices of dropped input columns
    bool deflation_free() const { return deflated.empty(); }
};

/// Modified Gram-Schmidt with one reorthogonalization pass. A column is
/// deflated when its norm after projection drops below `deflation_tol`
/// times its original norm.
inline Orthonormalized orthonormalize(const Mat& v, double deflation_tol = 1e-10) {
    const Index nrows = v.rows();
    const Index ncols = v.cols();
    Orthonormalized out;
    out.q.resize(nrows, ncols);
    out.t = Mat::Zero(ncols, ncols);
    Index k = 0;
    for (Index j = 0; j < ncols; ++j) {
        Vec w = v.col(j);
        const double pre = w.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < k; ++i) {
                const double h = out.q.col(i).dot(w);
                w -= h * out.q.col(i);
                out.t(i, j) += h;
            }
        }
        const double post = w.norm();
        if (pre == 0.0 || post < deflation_tol * pre) {
            out.deflated.push_back(j);
            continue;
        }
        out.q.col(k) = w / post;
        out.t(k, j) = post;
        ++k;
    }
    out.q.conservativeResize(nrows, k);
    out.t.conservativeResize(k, ncols);
    return out;
}

// ---------------------------------------------------------------------------
// Small dense Lyapunov solver (Bartels-Stewart on the real Schur form)
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Index> schur_block_starts(const Mat& t) {
    std::vector<Index> starts;
    const Index n = t.rows();
    Index i = 0;
    while (i < n) {
        starts.push_back(i);
        if (i + 1 < n && t(i + 1, i) != 0.0)
            i += 2;
        else
            i += 1;
    }
    starts.push_back(n);
    return starts;
}

// Solves t11*y + y*t22' = rhs for a block of size <= 2x2 via Kronecker
// vectorization. Throws when the spectra make the block system singular.
inline Mat solve_sylvester_block(const Mat& t11, const Mat& t22, const Mat& rhs) {
    const Index p = t11.rows(), q = t22.rows();
    Mat sys = Mat::Zero(p * q, p * q);
    // vec(t11*y) = (I_q kron t11) vec(y); vec(y*t22') = (t22 kron I_p) vec(y)
    for (Index a = 0; a < q; ++a)
        sys.block(a * p, a * p, p, p) += t11;
    for (Index a = 0; a < q; ++a)
        for (Index b = 0; b < q; ++b)
            sys.block(a * p, b * p, p, p).diagonal().array() += t22(a, b);
    Eigen::FullPivLU<Mat> lu(sys);
    const auto& piv = lu.matrixLU().diagonal().cwiseAbs();
    if (piv.maxCoeff() == 0.0 || piv.minCoeff() <= 1e-13 * piv.maxCoeff())
        throw NonUniqueSolutionError(
            "solve_lyapunov_small: spectra of a and -a overlap, no unique solution");
    Vec y = lu.solve(Eigen::Map<const Vec>(rhs.data(), p * q));
    return Eigen::Map<const Mat>(y.data(), p, q);
}

} // namespace detail

/// Solves a*x + x*a' + q = 0 (continuous Lyapunov equation, this sign and
/// argument convention throughout the library) by Schur decomposition of `a`
/// and block back-substitution. `a` and `-a` must have disjoint spectra.
inline Mat solve_lyapunov_small(const Mat& a, const Mat& q) {
    if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows())
        throw DimensionMismatchError("solve_lyapunov_small: dimension mismatch");
    const Index n = a.rows();
    if (n == 0) return Mat(0, 0);

    Eigen::RealSchur<Mat> schur(a);
    if (schur.info() != Eigen::Success)
        throw Error("solve_lyapunov_small: Schur decomposition failed");
    const Mat& u = schur.matrixU();
    const Mat& t = schur.matrixT();

    Mat qt = u.transpose() * q * u;
    Mat y = Mat::Zero(n, n);

    const std::vector<Index> bs = detail::schur_block_starts(t);
    const Index nb = static_cast<Index>(bs.size()) - 1;
    // t*y + y*t' = -qt; block (i,j) depends on blocks below and to the right
    for (Index j = nb - 1; j >= 0; --j) {
        for (Index i = nb - 1; i >= 0; --i) {
            const Index r0 = bs[i], r1 = bs[i + 1], c0 = bs[j], c1 = bs[j + 1];
            Mat rhs = -qt.block(r0, c0, r1 - r0, c1 - c0);
            if (r1 < n)
                rhs -= t.block(r0, r1, r1 - r0, n - r1) * y.block(r1, c0, n - r1, c1 - c0);
            if (c1 < n)
                rhs -= y.block(r0, c1, r1 - r0, n - c1) * t.block(c0, c1, c1 - c0, n - c1).transpose();
            y.block(r0, c0, r1 - r0, c1 - c0) = detail::solve_sylvester_block(
                t.block(r0, r0, r1 - r0, r1 - r0), t.block(c0, c0, c1 - c0, c1 - c0), rhs);
        }
    }

    Mat x = u * y * u.transpose();
    const double qscale = max_abs(q);
    if (max_abs(Mat(q - q.transpose())) <= 1e-14 * std::max(qscale, 1.0))
        x = 0.5 * (x + x.transpose()).eval();
    return x;
}

// ---------------------------------------------------------------------------
// Dense (generalized) eigenvalues
// ---------------------------------------------------------------------------

/// Eigenvalues of a matrix or a regular pencil (A,E): finite values lambda
/// with A v = lambda E v, plus the count of eigenvalues at infinity.
struct Spectrum {
    std::vector<Complex> finite;
    Index infinite_count = 0;

    double max_real() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& l : finite) m = std::max(m, l.real());
        return m;
    }
    bool all_in_open_left_half_plane() const {
        for (const auto& l : finite)
            if (l.real() >= 0.0) return false;
        return true;
    }
};

inline Spectrum eigenvalues_dense(const Mat& a) {
    Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw Error("eigenvalues_dense: eigensolver did not converge");
    Spectrum s;
    s.finite.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    return s;
}

inline Spectrum eigenvalues_dense(const Mat& a, const Mat& e) {
    if (a.rows() != a.cols() || e.rows() != e.cols() || a.rows() != e.rows())
        throw DimensionMismatchError("eigenvalues_dense: dimension mismatch");
    Eigen::GeneralizedEigenSolver<Mat> ges(a, e, /*computeEigenvectors=*/false);
    if (ges.info() != Eigen::Success)
        throw Error("eigenvalues_dense: QZ iteration did not converge");
    const double sa = std::max(max_abs(a), 1e-300);
    const double se = std::max(max_abs(e), 1e-300);
    Spectrum s;
    for (Index i = 0; i < a.rows(); ++i) {
        const Complex alpha = ges.alphas()(i);
        const double beta = ges.betas()(i);
        if (std::abs(beta) > 1e-12 * se) {
            s.finite.push_back(alpha / beta);
        } else if (std::abs(alpha) > 1e-12 * sa) {
            ++s.infinite_count;
        } else {
            throw SingularPencilError("eigenvalues_dense: indeterminate eigenvalue, pencil is singular");
        }
    }
    return s;
}

} // namespace semor
