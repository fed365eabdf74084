#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semor/krylov.hpp"
#include "semor/model.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// Reduced model
// ---------------------------------------------------------------------------

/// Dense reduced ODE model er x' = ar x + br u, y = cr x + dr u. All
/// reducers in this library produce ODEs (er nonsingular; er = I for PORK).
struct ReducedModel {
    Mat er, ar, br, cr, dr;

    // provenance
    std::string method;
    std::vector<Complex> shifts;          ///< interpolation points used, if any
    Mat d_imp;                            ///< implicit feedthrough carried into dr
    std::optional<Mat> pork_gramian;      ///< Gramian certificate from PORK
    Side pork_side = Side::input;

    Index order() const { return ar.rows(); }
    Index num_inputs() const { return br.cols(); }
    Index num_outputs() const { return cr.rows(); }
};

inline CMat transfer_eval(const ReducedModel& rom, Complex s) {
    CMat pencil = s * rom.er.cast<Complex>() - rom.ar.cast<Complex>();
    Eigen::PartialPivLU<CMat> lu(pencil);
    if (rom.order() > 0) {
        const Eigen::ArrayXd piv = lu.matrixLU().diagonal().cwiseAbs();
        if (piv.maxCoeff() == 0.0 || piv.minCoeff() <= 1e-13 * piv.maxCoeff())
            throw SingularMatrixError("transfer_eval: s hits the reduced spectrum");
    }
    return rom.cr.cast<Complex>() * lu.solve(rom.br.cast<Complex>()) + rom.dr.cast<Complex>();
}

inline Spectrum spectrum(const ReducedModel& rom) { return eigenvalues_dense(rom.ar, rom.er); }

namespace detail {

/// Theorem-style corrected projection shared by the two-sided and one-sided
/// reducers: r is m x n (zero when no input data), l is n x p (zero when no
/// output data).
inline ReducedModel corrected_rom(const SemiExplicitDae& dae, const Mat& v, const Mat& w,
                                  const Mat& r, const Mat& l, const std::string& method) {
    const Mat dimp = implicit_feedthrough(dae);
    ReducedModel rom;
    rom.method = method;
    rom.d_imp = dimp;
    rom.er = w.transpose() * (dae.e_full() * v);
    rom.ar = w.transpose() * (dae.a_full() * v) + l * dimp * r;
    rom.br = w.transpose() * dae.b_full() + l * dimp;
    rom.cr = dae.c_full() * v + dimp * r;
    rom.dr = dae.d() + dimp;

    Eigen::PartialPivLU<Mat> lu(rom.er);
    const Eigen::ArrayXd piv = lu.matrixLU().diagonal().cwiseAbs();
    if (rom.order() > 0 && (piv.maxCoeff() == 0.0 || piv.minCoeff() <= 1e-13 * piv.maxCoeff()))
        throw SingularProjectionError(method + ": w'Ev is singular");
    return rom;
}

inline void require_same_order(const KrylovBasis& v, const KrylovBasis& w) {
    if (v.order() != w.order())
        throw DimensionMismatchError("project_corrected: bases must have the same order");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Two-sided corrected projection
// ---------------------------------------------------------------------------

/// Petrov-Galerkin reduction of the SE-DAE with the implicit-feedthrough
/// correction terms, so the result equals the tangential interpolation of
/// the underlying ODE without ever forming it. The correction directions
/// (R, L) are taken from the interpolation data attached to the bases; a
/// basis of the opposite kind contributes zeros.
inline ReducedModel project_corrected(const SemiExplicitDae& dae, const KrylovBasis& v,
                                      const KrylovBasis& w) {
    detail::require_same_order(v, w);
    const Index n = v.order();
    const Mat r = v.side() == Side::input ? v.data.dirs : Mat::Zero(dae.num_inputs(), n);
    const Mat l = w.side() == Side::output ? w.data.dirs : Mat::Zero(n, dae.num_outputs());
    ReducedModel rom = detail::corrected_rom(dae, v.v, w.v, r, l, "two-sided-corrected");
    rom.shifts = v.data.shifts;
    return rom;
}

// ---------------------------------------------------------------------------
// One-sided orthogonal reduction
// ---------------------------------------------------------------------------

/// Orthogonal (Galerkin) projection W = V with the structural guards: the
/// input side requires b22 = 0, the output side c22 = 0, either side also
/// admits the symmetry triple a22 = a22', a12 = a21', c22 = b22' (with the
/// matching choice of correction directions). When none of the conditions
/// hold the reduction does not reproduce the underlying ODE and can destroy
/// dissipativity, so it is refused unless `unsafe` is set.
inline ReducedModel orthogonal_reduce(const SemiExplicitDae& dae, const KrylovBasis& basis,
                                      bool unsafe = false) {
    const ValidationReport rep = validate_semi_explicit(dae);
    const bool guard_ok = basis.side() == Side::input
                              ? (rep.b22_zero || rep.symmetry_triple)
                              : (rep.c22_zero || rep.symmetry_triple);
    if (!guard_ok && !unsafe)
        throw StructuralGuardError(
            basis.side() == Side::input
                ? "orthogonal_reduce: input-side projection needs b22 = 0 or the symmetry triple"
                : "orthogonal_reduce: output-side projection needs c22 = 0 or the symmetry triple");

    const KrylovBasis ob = orthonormalized_basis(basis);
    const Index n = ob.order();
    Mat r, l;
    if (basis.side() == Side::input) {
        r = ob.data.dirs;
        l = (!rep.b22_zero && rep.symmetry_triple) ? Mat(r.transpose())
                                                   : Mat::Zero(n, dae.num_outputs());
    } else {
        l = ob.data.dirs;
        r = (!rep.c22_zero && rep.symmetry_triple) ? Mat(l.transpose())
                                                   : Mat::Zero(dae.num_inputs(), n);
    }
    ReducedModel rom = detail::corrected_rom(
        dae, ob.v, ob.v, r, l,
        basis.side() == Side::input ? "orthogonal-v" : "orthogonal-w");
    rom.shifts = ob.data.shifts;
    return rom;
}

// ---------------------------------------------------------------------------
// PORK / SE-DAE PORK
// ---------------------------------------------------------------------------

struct PorkOutput {
    ReducedModel rom;
    KrylovBasis basis;
};

/// Pseudo-optimal rational Krylov: builds the reduced model whose poles are
/// the mirrored shifts and which is H2-optimal among all models with that
/// spectrum. The input-side construction is
///
///   solve (-S_V') X + X (-S_V) + R'R = 0,  P_r = X^-1
///   B_r = -P_r R',  A_r = S_V + B_r R,  E_r = I
///   C_r = C V + D_imp R,  D_r = D + D_imp
///
/// with V the Sylvester-Krylov basis of the SE-DAE; D_imp vanishes for plain
/// ODEs (n_alg = 0 or c22 = 0). The dual output-side version is analogous.
/// Requires all shifts in the open right half-plane.
inline PorkOutput pork_with_basis(const SemiExplicitDae& dae, const InterpolationData& data) {
    const Index n = data.order();
    const Spectrum shift_spec = eigenvalues_dense(data.s);
    for (const Complex& z : shift_spec.finite)
        if (z.real() <= 0.0)
            throw ShiftInClosedLeftHalfPlaneError(
                "pork: all shifts must have strictly positive real part");

    Mat x;
    if (data.side == Side::input)
        x = solve_lyapunov_small(-data.s.transpose(), data.dirs.transpose() * data.dirs);
    else
        x = solve_lyapunov_small(-data.s, data.dirs * data.dirs.transpose());

    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    if (es.info() != Eigen::Success ||
        es.eigenvalues().minCoeff() <= 1e-13 * std::max(es.eigenvalues().maxCoeff(), 1e-300))
        throw LyapunovSingularError("pork: interpolation data is not an observable pair");
    const Mat p_r = Eigen::LLT<Mat>(x).solve(Mat::Identity(n, n));

    const Mat dimp = implicit_feedthrough(dae);
    PorkOutput out;
    ReducedModel& rom = out.rom;
    rom.method = "pork";
    rom.d_imp = dimp;
    rom.shifts = data.shifts;
    rom.er = Mat::Identity(n, n);
    rom.dr = dae.d() + dimp;
    rom.pork_gramian = p_r;
    rom.pork_side = data.side;
    if (data.side == Side::input) {
        out.basis = input_krylov_basis(dae, data);
        rom.br = -p_r * data.dirs.transpose();
        rom.ar = data.s + rom.br * data.dirs;
        rom.cr = dae.c_full() * out.basis.v + dimp * data.dirs;
    } else {
        out.basis = output_krylov_basis(dae, data);
        rom.cr = -data.dirs.transpose() * p_r;
        rom.ar = data.s + data.dirs * rom.cr;
        rom.br = out.basis.v.transpose() * dae.b_full() + data.dirs * dimp;
    }
    return out;
}

inline ReducedModel pork(const SemiExplicitDae& dae, const InterpolationData& data) {
    return pork_with_basis(dae, data).rom;
}

// ---------------------------------------------------------------------------
// H2 norm
// ---------------------------------------------------------------------------

/// H2 norm of the strictly proper part of the reduced model (dr is always
/// excluded; the norm of a non-strictly-proper system does not exist).
inline double h2_norm(const ReducedModel& rom) {
    const Spectrum spec = spectrum(rom);
    if (!spec.all_in_open_left_half_plane())
        throw UnstableSystemError("h2_norm: model has eigenvalues with Re >= 0");
    Eigen::PartialPivLU<Mat> elu(rom.er);
    const Mat a = elu.solve(rom.ar);
    const Mat b = elu.solve(rom.br);
    const Mat p = solve_lyapunov_small(a, b * b.transpose());
    const double sq = (rom.cr * p * rom.cr.transpose()).trace();
    return std::sqrt(std::max(0.0, sq));
}

/// Squared H2 norm straight from the PORK Gramian certificate; avoids the
/// Lyapunov solve, which makes it the cheap cost function for SPARK.
inline double h2_norm_sq_from_gramian(const ReducedModel& rom) {
    if (!rom.pork_gramian)
        throw Error("h2_norm_sq_from_gramian: model carries no Gramian certificate");
    if (rom.pork_side == Side::input)
        return (rom.cr * (*rom.pork_gramian) * rom.cr.transpose()).trace();
    return (rom.br.transpose() * (*rom.pork_gramian) * rom.br).trace();
}

} // namespace semor
