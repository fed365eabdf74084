#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "semor/linalg.hpp"

namespace semor {

/// Which side of the system an operation acts on: the input (V / B-related)
/// or the output (W / C-related) side.
enum class Side { input, output };

// ---------------------------------------------------------------------------
// Semi-explicit index-1 DAE
// ---------------------------------------------------------------------------

/// Block-partitioned descriptor system
///
///   [e11 0] d/dt [x1]   [a11 a12] [x1]   [b11]
///   [ 0  0]      [x2] = [a21 a22] [x2] + [b22] u
///
///              y = [c11 c22] [x1; x2] + d u
///
/// with e11 and a22 nonsingular (verified by factorization on construction).
/// Instances are immutable; the `with_*` methods produce modified copies that
/// share the assembled pencil and its factorizations.
class SemiExplicitDae {
public:
    SemiExplicitDae(SpMat e11, SpMat a11, SpMat a12, SpMat a21, SpMat a22,
                    Mat b11, Mat b22, Mat c11, Mat c22, Mat d)
        : core_(std::make_shared<Core>(std::move(e11), std::move(a11), std::move(a12),
                                       std::move(a21), std::move(a22))),
          b11_(std::move(b11)), b22_(std::move(b22)),
          c11_(std::move(c11)), c22_(std::move(c22)), d_(std::move(d)),
          cache_(std::make_shared<Cache>()) {
        check_io_dims();
    }

    Index n_dyn() const { return core_->e11.rows(); }
    Index n_alg() const { return core_->a22.rows(); }
    Index order() const { return n_dyn() + n_alg(); }
    Index num_inputs() const { return b11_.cols(); }
    Index num_outputs() const { return c11_.rows(); }

    const SpMat& e11() const { return core_->e11; }
    const SpMat& a11() const { return core_->a11; }
    const SpMat& a12() const { return core_->a12; }
    const SpMat& a21() const { return core_->a21; }
    const SpMat& a22() const { return core_->a22; }
    const Mat& b11() const { return b11_; }
    const Mat& b22() const { return b22_; }
    const Mat& c11() const { return c11_; }
    const Mat& c22() const { return c22_; }
    const Mat& d() const { return d_; }

    /// Assembled N x N descriptor and system matrices of Eq-style full form.
    const SpMat& e_full() const { return core_->e_full; }
    const SpMat& a_full() const { return core_->a_full; }

    Mat b_full() const {
        Mat b(order(), num_inputs());
        b.topRows(n_dyn()) = b11_;
        b.bottomRows(n_alg()) = b22_;
        return b;
    }
    Mat c_full() const {
        Mat c(num_outputs(), order());
        c.leftCols(n_dyn()) = c11_;
        c.rightCols(n_alg()) = c22_;
        return c;
    }

    Mat a22_solve(const Mat& rhs) const { return core_->a22_lu->solve(rhs); }
    Mat a22_solve_transposed(const Mat& rhs) const { return core_->a22t_lu().solve(rhs); }

    /// a22^-1 * b22, memoized (idempotent under concurrent first access).
    const Mat& a22inv_b22() const {
        std::call_once(cache_->once_ab, [&] {
            cache_->a22inv_b22 = b22_.size() == 0 || max_abs(b22_) == 0.0
                                     ? Mat::Zero(n_alg(), num_inputs())
                                     : a22_solve(b22_);
        });
        return cache_->a22inv_b22;
    }

    /// c22 * a22^-1, memoized.
    const Mat& c22_a22inv() const {
        std::call_once(cache_->once_ca, [&] {
            cache_->c22_a22inv = c22_.size() == 0 || max_abs(c22_) == 0.0
                                     ? Mat::Zero(num_outputs(), n_alg())
                                     : Mat(a22_solve_transposed(c22_.transpose()).transpose());
        });
        return cache_->c22_a22inv;
    }

    /// Copy with replaced input matrices; shares the pencil factorizations.
    SemiExplicitDae with_inputs(Mat b11, Mat b22) const {
        SemiExplicitDae out(*this);
        out.b11_ = std::move(b11);
        out.b22_ = std::move(b22);
        out.cache_ = std::make_shared<Cache>();
        out.check_io_dims();
        return out;
    }

    /// Copy with replaced output matrices; shares the pencil factorizations.
    SemiExplicitDae with_outputs(Mat c11, Mat c22) const {
        SemiExplicitDae out(*this);
        out.c11_ = std::move(c11);
        out.c22_ = std::move(c22);
        out.cache_ = std::make_shared<Cache>();
        out.check_io_dims();
        return out;
    }

    SemiExplicitDae with_feedthrough(Mat d) const {
        SemiExplicitDae out(*this);
        out.d_ = std::move(d);
        out.check_io_dims();
        return out;
    }

private:
    struct Core {
        SpMat e11, a11, a12, a21, a22;
        SpMat e_full, a_full;
        std::unique_ptr<LuReal> e11_lu;
        std::unique_ptr<LuReal> a22_lu;

        Core(SpMat e11_, SpMat a11_, SpMat a12_, SpMat a21_, SpMat a22_)
            : e11(std::move(e11_)), a11(std::move(a11_)), a12(std::move(a12_)),
              a21(std::move(a21_)), a22(std::move(a22_)) {
            const Index nd = e11.rows(), na = a22.rows();
            if (nd < 1) throw DimensionMismatchError("SemiExplicitDae: n_dyn must be >= 1");
            if (e11.cols() != nd || a11.rows() != nd || a11.cols() != nd ||
                a12.rows() != nd || a12.cols() != na || a21.rows() != na ||
                a21.cols() != nd || a22.cols() != na)
                throw DimensionMismatchError("SemiExplicitDae: inconsistent block dimensions");

            try {
                e11_lu = std::make_unique<LuReal>(e11);
            } catch (const SingularMatrixError&) {
                throw SingularMatrixError("SemiExplicitDae: e11 is singular");
            }
            try {
                a22_lu = std::make_unique<LuReal>(a22);
            } catch (const SingularMatrixError&) {
                throw SingularMatrixError("SemiExplicitDae: a22 is singular");
            }

            std::vector<Eigen::Triplet<double>> te, ta;
            auto add_block = [](std::vector<Eigen::Triplet<double>>& ts, const SpMat& m,
                                Index r0, Index c0) {
                for (Index k = 0; k < m.outerSize(); ++k)
                    for (SpMat::InnerIterator it(m, k); it; ++it)
                        ts.emplace_back(it.row() + r0, it.col() + c0, it.value());
            };
            add_block(te, e11, 0, 0);
            add_block(ta, a11, 0, 0);
            add_block(ta, a12, 0, nd);
            add_block(ta, a21, nd, 0);
            add_block(ta, a22, nd, nd);
            e_full.resize(nd + na, nd + na);
            a_full.resize(nd + na, nd + na);
            e_full.setFromTriplets(te.begin(), te.end());
            a_full.setFromTriplets(ta.begin(), ta.end());

            if (!Mat(e11).allFinite() || !Mat(a_full).allFinite())
                throw Error("SemiExplicitDae: non-finite entries");
        }

        const LuReal& a22t_lu() {
            std::call_once(once_a22t, [&] {
                SpMat at = a22.transpose();
                a22t_lu_ = std::make_unique<LuReal>(at);
            });
            return *a22t_lu_;
        }

    private:
        std::once_flag once_a22t;
        std::unique_ptr<LuReal> a22t_lu_;
    };

    struct Cache {
        std::once_flag once_ab, once_ca;
        Mat a22inv_b22;
        Mat c22_a22inv;
    };

    void check_io_dims() const {
        const Index nd = n_dyn(), na = n_alg();
        const Index m = b11_.cols(), p = c11_.rows();
        if (b11_.rows() != nd || b22_.rows() != na || b22_.cols() != m ||
            c11_.cols() != nd || c22_.rows() != p || c22_.cols() != na ||
            d_.rows() != p || d_.cols() != m)
            throw DimensionMismatchError("SemiExplicitDae: inconsistent input/output dimensions");
        if (!b11_.allFinite() || !b22_.allFinite() || !c11_.allFinite() ||
            !c22_.allFinite() || !d_.allFinite())
            throw Error("SemiExplicitDae: non-finite entries in b/c/d");
    }

    std::shared_ptr<Core> core_;
    Mat b11_, b22_, c11_, c22_, d_;
    mutable std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Underlying ODE
// ---------------------------------------------------------------------------

/// The ODE obtained by eliminating the algebraic variables of an SE-DAE:
///   e1 x1' = a1 x1 + b1 u,  y = c1 x1 + d1 u
struct OdeRealization {
    Mat e1, a1, b1, c1, d1;

    Index order() const { return a1.rows(); }
    Index num_inputs() const { return b1.cols(); }
    Index num_outputs() const { return c1.rows(); }
};

/// Schur-complement elimination of the algebraic equations. Forms dense
/// matrices of order n_dyn; intended for desk-scale models and oracles.
inline OdeRealization underlying_ode(const SemiExplicitDae& dae) {
    OdeRealization ode;
    const Mat a22inv_a21 = dae.a22_solve(Mat(dae.a21()));
    const Mat& a22inv_b22 = dae.a22inv_b22();
    ode.e1 = Mat(dae.e11());
    ode.a1 = Mat(dae.a11()) - dae.a12() * a22inv_a21;
    ode.b1 = dae.b11() - dae.a12() * a22inv_b22;
    ode.c1 = dae.c11() - dae.c22() * a22inv_a21;
    ode.d1 = dae.d() - dae.c22() * a22inv_b22;
    return ode;
}

/// G_inf = -c22 a22^-1 b22, the constant feedthrough hidden in the algebraic
/// part of an index-1 DAE.
inline Mat implicit_feedthrough(const SemiExplicitDae& dae) {
    if (dae.num_outputs() <= dae.num_inputs())
        return -dae.c22_a22inv() * dae.b22();
    return -dae.c22() * dae.a22inv_b22();
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

struct ValidationReport {
    Index n_dyn = 0, n_alg = 0, num_inputs = 0, num_outputs = 0;
    bool e11_nonsingular = false;
    bool a22_nonsingular = false;
    bool b22_zero = false;
    bool c22_zero = false;
    bool d_zero = false;
    bool symmetry_triple = false;  ///< a22 = a22', a12 = a21', c22 = b22'
};

inline ValidationReport validate_semi_explicit(const SemiExplicitDae& dae) {
    ValidationReport r;
    r.n_dyn = dae.n_dyn();
    r.n_alg = dae.n_alg();
    r.num_inputs = dae.num_inputs();
    r.num_outputs = dae.num_outputs();
    // construction already factorized both blocks
    r.e11_nonsingular = true;
    r.a22_nonsingular = true;
    r.b22_zero = max_abs(dae.b22()) == 0.0;
    r.c22_zero = max_abs(dae.c22()) == 0.0;
    r.d_zero = max_abs(dae.d()) == 0.0;

    const double sa = std::max(max_abs(dae.a22()), 1.0);
    const bool a22_sym = max_abs(SpMat(SpMat(dae.a22().transpose()) - dae.a22())) <= 1e-12 * sa;
    const double sc = std::max(max_abs(dae.a12()), std::max(max_abs(dae.a21()), 1.0));
    const bool cross_sym = max_abs(SpMat(SpMat(dae.a21().transpose()) - dae.a12())) <= 1e-12 * sc;
    const double sb = std::max({max_abs(dae.b22()), max_abs(dae.c22()), 1.0});
    const bool io_sym = max_abs(Mat(dae.c22() - dae.b22().transpose())) <= 1e-12 * sb;
    r.symmetry_triple = a22_sym && cross_sym && io_sym;
    return r;
}

// ---------------------------------------------------------------------------
// Strictly proper realizations
// ---------------------------------------------------------------------------

/// Realization of G(s) - d - G_inf. Side::input shifts the algebraic input
/// coupling into b11 and zeroes b22; Side::output does the dual on c.
/// Either way the result has exactly zero feedthrough (explicit and implicit).
inline SemiExplicitDae strictly_proper(const SemiExplicitDae& dae, Side side) {
    const Index p = dae.num_outputs(), m = dae.num_inputs();
    if (side == Side::input) {
        Mat b11 = dae.b11() - dae.a12() * dae.a22inv_b22();
        SemiExplicitDae out = dae.with_inputs(std::move(b11), Mat::Zero(dae.n_alg(), m));
        return out.with_feedthrough(Mat::Zero(p, m));
    }
    Mat c11 = dae.c11() - dae.c22_a22inv() * Mat(dae.a21());
    SemiExplicitDae out = dae.with_outputs(std::move(c11), Mat::Zero(p, dae.n_alg()));
    return out.with_feedthrough(Mat::Zero(p, m));
}

// ---------------------------------------------------------------------------
// Transfer-function evaluation
// ---------------------------------------------------------------------------

/// G(s) = C (sE - A)^-1 B + D on the assembled sparse pencil.
inline CMat transfer_eval(const SemiExplicitDae& dae, Complex s) {
    CSpMat pencil = (s * dae.e_full().cast<Complex>() - dae.a_full().cast<Complex>()).pruned();
    std::unique_ptr<LuComplex> lu;
    try {
        lu = std::make_unique<LuComplex>(pencil);
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError("transfer_eval: s is (numerically) a generalized eigenvalue of (A,E)");
    }
    CMat x = lu->solve(dae.b_full().cast<Complex>());
    return dae.c_full().cast<Complex>() * x + dae.d().cast<Complex>();
}

inline CMat transfer_eval(const OdeRealization& ode, Complex s) {
    CMat pencil = s * ode.e1.cast<Complex>() - ode.a1.cast<Complex>();
    Eigen::PartialPivLU<CMat> lu(pencil);
    const Eigen::ArrayXd piv = lu.matrixLU().diagonal().cwiseAbs();
    if (ode.order() > 0 && (piv.maxCoeff() == 0.0 || piv.minCoeff() <= 1e-13 * piv.maxCoeff()))
        throw SingularMatrixError("transfer_eval: s is (numerically) an eigenvalue of (a1,e1)");
    return ode.c1.cast<Complex>() * lu.solve(ode.b1.cast<Complex>()) + ode.d1.cast<Complex>();
}

// ---------------------------------------------------------------------------
// Frequency response
// ---------------------------------------------------------------------------

struct FrequencyResponse {
    std::vector<double> omega;     ///< rad/s, strictly increasing
    std::vector<CMat> value;       ///< p x m per point
    std::vector<bool> valid;       ///< false where the solve hit the spectrum

    Index num_points() const { return static_cast<Index>(omega.size()); }
};

inline std::vector<double> log_spaced(double lo, double hi, Index count) {
    std::vector<double> w(count);
    if (count == 1) {
        w[0] = lo;
        return w;
    }
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (Index i = 0; i < count; ++i)
        w[i] = std::pow(10.0, llo + (lhi - llo) * double(i) / double(count - 1));
    return w;
}

template <typename System>
FrequencyResponse frequency_response(const System& sys, const std::vector<double>& omegas) {
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!std::isfinite(omegas[i]) || (i > 0 && omegas[i] <= omegas[i - 1]))
            throw Error("frequency_response: omegas must be finite and strictly increasing");
    }
    FrequencyResponse fr;
    fr.omega = omegas;
    fr.value.reserve(omegas.size());
    fr.valid.reserve(omegas.size());
    for (double w : omegas) {
        try {
            fr.value.push_back(transfer_eval(sys, Complex(0.0, w)));
            fr.valid.push_back(true);
        } catch (const SingularMatrixError&) {
            fr.value.push_back(CMat());
            fr.valid.push_back(false);
        }
    }
    return fr;
}

} // namespace semor
