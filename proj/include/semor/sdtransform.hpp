#pragma once

#include <utility>

#include "semor/model.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// Strict dissipativity of the underlying dynamics
// ---------------------------------------------------------------------------

/// Outcome of is_strictly_dissipative(). The booleans are taken at a
/// relative tolerance of 1e-10 against the recorded extremal eigenvalues.
struct DissipativityReport {
    bool strictly_dissipative = false;
    bool e1_spd = false;
    double e1_min_eig = 0.0;
    bool a1_symmpart_nd = false;
    double a1_symmpart_max_eig = 0.0;  ///< of sym(A) when the shortcut fired, else of sym(a1)
    bool shortcut_used = false;
};

namespace detail {

inline bool symmetric_within(const Mat& m, double rtol) {
    const double scale = std::max(max_abs(m), 1e-300);
    return max_abs(Mat(m - m.transpose())) <= rtol * scale;
}

inline double min_sym_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_sym_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

} // namespace detail

/// Checks E1 = E1' > 0 and A1 + A1' < 0 for the underlying ODE. Tries the
/// full-matrix shortcut first: A + A' < 0 already implies the Schur
/// complement condition, so a1 never needs to be formed in that case. The
/// shortcut is skipped above desk scale, where forming sym(A) densely would
/// not pay off.
inline DissipativityReport is_strictly_dissipative(const SemiExplicitDae& dae) {
    DissipativityReport rep;

    const Mat e1 = Mat(dae.e11());
    const double e_scale = std::max(max_abs(e1), 1e-300);
    rep.e1_min_eig = detail::min_sym_eig(e1);
    rep.e1_spd = detail::symmetric_within(e1, 1e-10) && rep.e1_min_eig > 1e-10 * e_scale;

    constexpr Index shortcut_limit = 2000;
    if (dae.order() <= shortcut_limit) {
        const Mat a = Mat(dae.a_full());
        const double a_scale = std::max(max_abs(a), 1e-300);
        const double max_eig = detail::max_sym_eig(a);
        if (max_eig < -1e-10 * a_scale) {
            rep.shortcut_used = true;
            rep.a1_symmpart_nd = true;
            rep.a1_symmpart_max_eig = max_eig;
            rep.strictly_dissipative = rep.e1_spd;
            return rep;
        }
    }

    const OdeRealization ode = underlying_ode(dae);
    const double a1_scale = std::max(max_abs(ode.a1), 1e-300);
    rep.a1_symmpart_max_eig = detail::max_sym_eig(ode.a1);
    rep.a1_symmpart_nd = rep.a1_symmpart_max_eig < -1e-10 * a1_scale;
    rep.strictly_dissipative = rep.e1_spd && rep.a1_symmpart_nd;
    return rep;
}

// ---------------------------------------------------------------------------
// Transformation to strictly dissipative form
// ---------------------------------------------------------------------------

struct SdTransformRecord {
    Mat p;                     ///< SPD solution of the Lyapunov equation
    std::string q_choice = "identity";
    double lyapunov_residual = 0.0;   ///< max-abs of A~'Y + Y A~ + I
    double p_min_eig = 0.0;
    double p_max_eig = 0.0;
};

/// Left-multiplies the DAE by T = [[E11' P, -E11' P A12 A22^-1], [0, I]],
/// where P solves the generalized Lyapunov equation
/// A1' X E11 + E11' X A1 + I = 0. This leaves the transfer function and the
/// algebraic rows untouched and produces a strictly dissipative realization:
/// the new dynamic row is (E11'P E11 | E11'P A1, 0 | E11'P B1). Requires an
/// asymptotically stable DAE and a desk-scale dense Lyapunov solve.
inline std::pair<SemiExplicitDae, SdTransformRecord> sd_transform(const SemiExplicitDae& dae) {
    const OdeRealization ode = underlying_ode(dae);

    const Spectrum spec = eigenvalues_dense(ode.a1, ode.e1);
    if (!spec.all_in_open_left_half_plane())
        throw UnstableSystemError("sd_transform: system has a finite eigenvalue with Re >= 0");

    // with A~ = E11^-1 A1 and Y = E11' X E11 the generalized equation becomes
    // the standard one A~' Y + Y A~ + I = 0
    Eigen::PartialPivLU<Mat> e1_lu(ode.e1);
    const Mat atil = e1_lu.solve(ode.a1);
    const Index nd = dae.n_dyn();
    Mat y;
    try {
        y = solve_lyapunov_small(atil.transpose(), Mat::Identity(nd, nd));
    } catch (const NonUniqueSolutionError& err) {
        throw LyapunovSingularError(std::string("sd_transform: ") + err.what());
    }
    y = 0.5 * (y + y.transpose()).eval();

    SdTransformRecord rec;
    rec.lyapunov_residual = max_abs(Mat(atil.transpose() * y + y * atil + Mat::Identity(nd, nd)));
    {
        Eigen::SelfAdjointEigenSolver<Mat> es(y, Eigen::EigenvaluesOnly);
        rec.p_min_eig = es.eigenvalues().minCoeff();
        rec.p_max_eig = es.eigenvalues().maxCoeff();
        if (rec.p_min_eig <= 1e-13 * std::max(rec.p_max_eig, 1e-300))
            throw NotPositiveDefiniteError("sd_transform: Lyapunov solution is not positive definite");
    }

    // P = E11^-T Y E11^-1, recorded for reproducibility
    Eigen::PartialPivLU<Mat> e1t_lu(Mat(ode.e1.transpose()));
    Mat z = e1t_lu.solve(y);                       // E11^-T Y
    rec.p = e1t_lu.solve(z.transpose()).transpose();  // (E11^-T Z')' = Z E11^-1
    rec.p = 0.5 * (rec.p + rec.p.transpose()).eval();

    // transformed dynamic row; e11' = E11'P E11 = Y exactly
    const Mat e11_new = y;
    const Mat a11_new = y * atil;
    const Mat b11_new = y * e1_lu.solve(ode.b1);

    SemiExplicitDae out(e11_new.sparseView(), a11_new.sparseView(),
                        SpMat(nd, dae.n_alg()), dae.a21(), dae.a22(),
                        b11_new, dae.b22(), dae.c11(), dae.c22(), dae.d());
    return {std::move(out), std::move(rec)};
}

} // namespace semor
