#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "semor/model.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// Interpolation data in real Sylvester form
// ---------------------------------------------------------------------------

/// Shifts and tangential directions encoded as the pair (S_V, R) of the input
/// Sylvester equation A V - E V S_V - B R = 0, or (S_W, L) of the dual
/// W'A - S_W W'E - L C = 0. Complex-conjugate shift pairs become 2x2 real
/// rotation blocks [[a, b], [-b, a]]; repeated (shift, direction) entries
/// become Jordan-type chains so that higher-order moments are matched.
struct InterpolationData {
    Side side = Side::input;
    Mat s;     ///< n x n, block upper (quasi-)triangular for built data
    Mat dirs;  ///< R: m x n for input side; L: n x p for output side

    std::vector<Complex> shifts;  ///< declared shift multiset, for reporting
    std::vector<CVec> tangents;   ///< tangential direction per declared shift

    Index order() const { return s.rows(); }
    Index num_channels() const { return side == Side::input ? dirs.rows() : dirs.cols(); }
};

namespace detail {

struct ShiftUnit {
    Complex shift;   // Im >= 0; Im > 0 stands for the conjugate pair
    CVec direction;
    Index chain = 1; // consecutive repetitions
    Index width() const { return (shift.imag() > 0.0 ? 2 : 1) * chain; }
};

inline std::vector<ShiftUnit> pair_up_shifts(const std::vector<Complex>& shifts,
                                             const std::vector<CVec>& directions) {
    if (shifts.size() != directions.size() || shifts.empty())
        throw Error("shifts_to_sylvester: need one direction per shift");
    std::vector<ShiftUnit> units;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const Complex s = shifts[i];
        const CVec& r = directions[i];
        if (r.size() == 0 || r.norm() == 0.0)
            throw ZeroDirectionError("shifts_to_sylvester: zero tangential direction");
        ShiftUnit u;
        if (s.imag() == 0.0) {
            if (r.imag().norm() != 0.0)
                throw UnpairedComplexShiftError(
                    "shifts_to_sylvester: real shift requires a real direction");
            u.shift = s;
            u.direction = r;
        } else {
            if (i + 1 >= shifts.size() || shifts[i + 1] != std::conj(s))
                throw UnpairedComplexShiftError(
                    "shifts_to_sylvester: complex shift without adjacent conjugate partner");
            if ((directions[i + 1] - r.conjugate()).norm() > 0.0)
                throw UnpairedComplexShiftError(
                    "shifts_to_sylvester: conjugate shifts need conjugate directions");
            u.shift = s.imag() > 0.0 ? s : std::conj(s);
            u.direction = s.imag() > 0.0 ? r : r.conjugate();
            ++i;
        }
        if (!units.empty() && units.back().shift == u.shift &&
            units.back().direction.size() == u.direction.size() &&
            (units.back().direction - u.direction).norm() == 0.0) {
            ++units.back().chain;  // higher-order moment at the same point
        } else {
            units.push_back(std::move(u));
        }
    }
    return units;
}

} // namespace detail

/// Builds (S_V, R) -- or (S_W, L) for side == output -- from a shift list.
/// Complex shifts must appear as adjacent conjugate pairs with conjugate
/// directions; each direction has as many entries as the relevant channel
/// count (inputs for the input side, outputs for the output side).
inline InterpolationData shifts_to_sylvester(const std::vector<Complex>& shifts,
                                             const std::vector<CVec>& directions,
                                             Side side = Side::input) {
    const auto units = detail::pair_up_shifts(shifts, directions);
    const Index m = units.front().direction.size();
    Index n = 0;
    for (const auto& u : units) {
        if (u.direction.size() != m)
            throw DimensionMismatchError("shifts_to_sylvester: direction lengths differ");
        n += u.width();
    }

    Mat s = Mat::Zero(n, n);
    Mat r = Mat::Zero(m, n);
    Index c = 0;
    for (const auto& u : units) {
        if (u.shift.imag() == 0.0) {
            for (Index k = 0; k < u.chain; ++k) {
                s(c + k, c + k) = u.shift.real();
                if (k + 1 < u.chain) s(c + k, c + k + 1) = 1.0;
            }
            r.col(c) = u.direction.real();
        } else {
            const double a = u.shift.real(), b = u.shift.imag();
            for (Index k = 0; k < u.chain; ++k) {
                const Index o = c + 2 * k;
                s(o, o) = a;
                s(o + 1, o + 1) = a;
                s(o, o + 1) = b;
                s(o + 1, o) = -b;
                if (k + 1 < u.chain) {
                    s(o, o + 2) = 1.0;
                    s(o + 1, o + 3) = 1.0;
                }
            }
            r.col(c) = u.direction.real();
            r.col(c + 1) = u.direction.imag();
        }
        c += u.width();
    }

    InterpolationData data;
    data.shifts = shifts;
    data.tangents = directions;
    data.side = side;
    if (side == Side::input) {
        data.s = std::move(s);
        data.dirs = std::move(r);
    } else {
        data.s = s.transpose();
        data.dirs = r.transpose();
    }
    return data;
}

// ---------------------------------------------------------------------------
// Krylov bases through shifted sparse solves
// ---------------------------------------------------------------------------

/// Basis of a tangential rational Krylov subspace together with the
/// interpolation data it satisfies in the Sylvester sense.
struct KrylovBasis {
    Mat v;                    ///< N x n (the W matrix for output-side bases)
    InterpolationData data;
    double residual_norm = 0.0;   ///< max-abs of the Sylvester residual
    double residual_scale = 1.0;  ///< ||A||_max * ||v||_max and friends

    Index order() const { return v.cols(); }
    Side side() const { return data.side; }
};

namespace detail {

/// Solves A V - E V S - F = 0 columnwise for quasi-upper-triangular S with
/// canonical 2x2 rotation blocks. One LU per distinct shift, complex pairs
/// solved once in complex arithmetic and split into real/imaginary columns.
inline Mat solve_sparse_dense_sylvester(const SpMat& a, const SpMat& e, const Mat& f,
                                        const Mat& s) {
    const Index big_n = a.rows();
    const Index n = s.rows();
    Mat v(big_n, n);

    std::map<std::pair<double, double>, std::shared_ptr<LuComplex>> complex_cache;
    std::map<double, std::shared_ptr<LuReal>> real_cache;
    const CSpMat ac = a.cast<Complex>();
    const CSpMat ec = e.cast<Complex>();

    Index c = 0;
    while (c < n) {
        const bool pair_block = (c + 1 < n) && s(c + 1, c) != 0.0;
        const Index bs = pair_block ? 2 : 1;
        // coupling with previously solved columns (Jordan chains and friends)
        Mat rhs = f.middleCols(c, bs);
        if (c > 0)
            rhs += e * (v.leftCols(c) * s.block(0, c, c, bs));

        try {
            if (!pair_block) {
                const double shift = s(c, c);
                auto it = real_cache.find(shift);
                if (it == real_cache.end()) {
                    SpMat pencil = (a - shift * e).pruned();
                    it = real_cache.emplace(shift, std::make_shared<LuReal>(pencil)).first;
                }
                v.col(c) = it->second->solve(rhs);
            } else {
                if (s(c, c) != s(c + 1, c + 1) || s(c + 1, c) != -s(c, c + 1))
                    throw Error("krylov: S is not in canonical rotation-block form");
                const Complex shift(s(c, c), s(c, c + 1));
                auto key = std::make_pair(shift.real(), shift.imag());
                auto it = complex_cache.find(key);
                if (it == complex_cache.end()) {
                    CSpMat pencil = (ac - shift * ec).pruned();
                    it = complex_cache.emplace(key, std::make_shared<LuComplex>(pencil)).first;
                }
                CVec sol = it->second->solve(
                    CMat(rhs.col(0).cast<Complex>() + Complex(0, 1) * rhs.col(1).cast<Complex>()));
                v.col(c) = sol.real();
                v.col(c + 1) = sol.imag();
            }
        } catch (const SingularMatrixError&) {
            throw ShiftOnSpectrumError(
                "krylov: shifted pencil is singular, a shift lies on the spectrum of (A,E)");
        }
        c += bs;
    }
    return v;
}

} // namespace detail

/// Max-abs Sylvester residual of a basis on the given system.
inline double sylvester_residual(const SemiExplicitDae& dae, const KrylovBasis& basis) {
    if (basis.side() == Side::input) {
        Mat res = dae.a_full() * basis.v - dae.e_full() * (basis.v * basis.data.s) -
                  dae.b_full() * basis.data.dirs;
        return max_abs(res);
    }
    Mat res = basis.v.transpose() * dae.a_full() - basis.data.s * (basis.v.transpose() * dae.e_full()) -
              basis.data.dirs * dae.c_full();
    return max_abs(res);
}

/// V with A V - E V S_V - B R = 0 on the assembled DAE pencil.
inline KrylovBasis input_krylov_basis(const SemiExplicitDae& dae, const InterpolationData& data) {
    if (data.side != Side::input)
        throw Error("input_krylov_basis: interpolation data is output-sided");
    if (data.dirs.rows() != dae.num_inputs())
        throw DimensionMismatchError("input_krylov_basis: tangential directions have wrong length");
    KrylovBasis basis;
    basis.data = data;
    basis.v = detail::solve_sparse_dense_sylvester(dae.a_full(), dae.e_full(),
                                                   dae.b_full() * data.dirs, data.s);
    basis.residual_norm = sylvester_residual(dae, basis);
    basis.residual_scale = std::max(max_abs(dae.a_full()) * std::max(max_abs(basis.v), 1.0), 1e-300);
    return basis;
}

/// W with W'A - S_W W'E - L C = 0, computed through transposed solves.
inline KrylovBasis output_krylov_basis(const SemiExplicitDae& dae, const InterpolationData& data) {
    if (data.side != Side::output)
        throw Error("output_krylov_basis: interpolation data is input-sided");
    if (data.dirs.cols() != dae.num_outputs())
        throw DimensionMismatchError("output_krylov_basis: tangential directions have wrong length");
    KrylovBasis basis;
    basis.data = data;
    const SpMat at = dae.a_full().transpose();
    const SpMat et = dae.e_full().transpose();
    // transpose of the dual equation: A' W - E' W S_W' - C' L' = 0
    basis.v = detail::solve_sparse_dense_sylvester(
        at, et, dae.c_full().transpose() * data.dirs.transpose(), data.s.transpose());
    basis.residual_norm = sylvester_residual(dae, basis);
    basis.residual_scale = std::max(max_abs(dae.a_full()) * std::max(max_abs(basis.v), 1.0), 1e-300);
    return basis;
}

/// Applies v <- v t and transforms the interpolation data along, so the
/// Sylvester equation keeps holding for the new basis. `t` must be invertible.
inline KrylovBasis change_basis(const KrylovBasis& basis, const Mat& t) {
    const Index n = basis.order();
    if (t.rows() != n || t.cols() != n)
        throw DimensionMismatchError("change_basis: transform has wrong size");
    Eigen::PartialPivLU<Mat> lu(t);
    const Eigen::ArrayXd piv = lu.matrixLU().diagonal().cwiseAbs();
    if (n > 0 && (piv.maxCoeff() == 0.0 || piv.minCoeff() <= 1e-13 * piv.maxCoeff()))
        throw SingularMatrixError("change_basis: transform is singular");

    KrylovBasis out;
    out.data.side = basis.data.side;
    out.data.shifts = basis.data.shifts;
    out.data.tangents = basis.data.tangents;
    out.v = basis.v * t;
    if (basis.side() == Side::input) {
        out.data.s = lu.solve(basis.data.s * t);      // t^-1 S t
        out.data.dirs = basis.data.dirs * t;          // R t
    } else {
        // W' -> t' W' requires S_W -> t' S_W t^-T and L -> t' L
        out.data.s = t.transpose() * lu.solve(basis.data.s.transpose()).transpose();
        out.data.dirs = t.transpose() * basis.data.dirs;
    }
    // conservative bound; callers re-verify with sylvester_residual() when it matters
    out.residual_norm = basis.residual_norm * std::max(1.0, max_abs(t) * double(n));
    out.residual_scale = basis.residual_scale;
    return out;
}

/// Orthonormalizes the basis columns while keeping the tracked (S, R/L) pair
/// consistent. Throws when columns are (numerically) dependent, since the
/// interpolation data cannot survive a deflation.
inline KrylovBasis orthonormalized_basis(const KrylovBasis& basis) {
    Orthonormalized o = orthonormalize(basis.v);
    if (!o.deflation_free())
        throw Error("orthonormalized_basis: basis is rank deficient; reduce the shift set");
    // v = q t  =>  q = v t^-1
    Mat tinv = Eigen::PartialPivLU<Mat>(o.t).solve(Mat::Identity(o.t.rows(), o.t.cols()));
    return change_basis(basis, tinv);
}

} // namespace semor
