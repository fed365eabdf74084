#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semor/adaptive.hpp"
#include "semor/reduce.hpp"
#include "semor/sdtransform.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// Stability and dissipativity of reduced models
// ---------------------------------------------------------------------------

struct StabilityResult {
    bool stable = false;
    Spectrum spectrum;
};

inline StabilityResult stability_check(const ReducedModel& rom) {
    StabilityResult r;
    r.spectrum = spectrum(rom);
    r.stable = r.spectrum.all_in_open_left_half_plane();
    return r;
}

/// Dissipativity certificate of a reduced ODE: er symmetric positive definite
/// and ar + ar' negative definite (relative tolerance 1e-10).
struct RomDissipativity {
    bool dissipative = false;
    double er_min_eig = 0.0;
    double ar_symmpart_max_eig = 0.0;
};

inline RomDissipativity rom_dissipativity(const ReducedModel& rom) {
    RomDissipativity r;
    const double e_scale = std::max(max_abs(rom.er), 1e-300);
    const double a_scale = std::max(max_abs(rom.ar), 1e-300);
    r.er_min_eig = detail::min_sym_eig(rom.er);
    r.ar_symmpart_max_eig = detail::max_sym_eig(rom.ar);
    r.dissipative = detail::symmetric_within(rom.er, 1e-10) &&
                    r.er_min_eig > 1e-10 * e_scale &&
                    r.ar_symmpart_max_eig < -1e-10 * a_scale;
    return r;
}

// ---------------------------------------------------------------------------
// H2 norms and direct error norms (dense oracle route)
// ---------------------------------------------------------------------------

/// ||C (sE - A)^-1 B||_H2 for a stable dense pencil with invertible E.
inline double h2_norm_strictly_proper(const Mat& e, const Mat& a, const Mat& b, const Mat& c) {
    if (!eigenvalues_dense(a, e).all_in_open_left_half_plane())
        throw UnstableSystemError("h2_norm_strictly_proper: unstable system");
    Eigen::PartialPivLU<Mat> elu(e);
    const Mat an = elu.solve(a);
    const Mat bn = elu.solve(b);
    const Mat p = solve_lyapunov_small(an, bn * bn.transpose());
    return std::sqrt(std::max(0.0, (c * p * c.transpose()).trace()));
}

/// H2 norm of the strictly proper part of the full SE-DAE, through the
/// underlying ODE (desk scale).
inline double h2_norm_full(const SemiExplicitDae& dae) {
    const OdeRealization ode = underlying_ode(dae);
    return h2_norm_strictly_proper(ode.e1, ode.a1, ode.b1, ode.c1);
}

/// Direct H2 error ||G - G_r|| through the dense error system of the
/// underlying ODE. The feedthroughs must agree (the error system has to be
/// strictly proper -- an index-1 DAE error with mismatched D_imp has a
/// constant term and no H2 norm).
inline double h2_error_direct(const SemiExplicitDae& full, const ReducedModel& rom) {
    const OdeRealization ode = underlying_ode(full);
    const double d_scale = std::max({max_abs(ode.d1), max_abs(rom.dr), 1.0});
    if (max_abs(Mat(ode.d1 - rom.dr)) > 1e-9 * d_scale)
        throw FeedthroughMismatchError(
            "h2_error_direct: feedthrough of model and ROM differ, error system is not strictly proper");

    const Index n1 = ode.order(), n2 = rom.order();
    Mat e = Mat::Zero(n1 + n2, n1 + n2);
    Mat a = Mat::Zero(n1 + n2, n1 + n2);
    Mat b(n1 + n2, ode.num_inputs());
    Mat c(ode.num_outputs(), n1 + n2);
    e.topLeftCorner(n1, n1) = ode.e1;
    e.bottomRightCorner(n2, n2) = rom.er;
    a.topLeftCorner(n1, n1) = ode.a1;
    a.bottomRightCorner(n2, n2) = rom.ar;
    b.topRows(n1) = ode.b1;
    b.bottomRows(n2) = rom.br;
    c.leftCols(n1) = ode.c1;
    c.rightCols(n2) = -rom.cr;
    return h2_norm_strictly_proper(e, a, b, c);
}

// ---------------------------------------------------------------------------
// Interpolation verification
// ---------------------------------------------------------------------------

/// Relative tangential interpolation residuals per declared shift:
/// ||(G(s_i) - G_r(s_i)) r_i|| / ||G(s_i) r_i|| for input-side data, and the
/// left-multiplied dual for output-side data.
inline std::vector<double> interpolation_residuals(const SemiExplicitDae& full,
                                                   const ReducedModel& rom,
                                                   const InterpolationData& data) {
    std::vector<double> res;
    res.reserve(data.shifts.size());
    for (std::size_t i = 0; i < data.shifts.size(); ++i) {
        const Complex s = data.shifts[i];
        const CMat g = transfer_eval(full, s);
        const CMat gr = transfer_eval(rom, s);
        const CVec& t = data.tangents[i];
        if (data.side == Side::input) {
            const double denom = std::max((g * t).norm(), 1e-300);
            res.push_back(((g - gr) * t).norm() / denom);
        } else {
            const double denom = std::max((t.transpose() * g).norm(), 1e-300);
            res.push_back((t.transpose() * (g - gr)).norm() / denom);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Comparison report
// ---------------------------------------------------------------------------

struct ModelDiagnostics {
    std::string name;
    Index order = 0;
    bool stable = false;
    double spectral_abscissa = 0.0;
    bool dissipative = false;
    double er_min_eig = 0.0;
    double ar_symmpart_max_eig = 0.0;
    std::optional<double> h2_error;
    std::vector<double> interpolation_residuals;
    std::vector<double> error_magnitude;  ///< per frequency, max-abs of G - G_r
};

struct ComparisonReport {
    std::vector<double> omega;
    std::vector<ModelDiagnostics> models;
};

struct NamedRom {
    std::string name;
    const ReducedModel* rom = nullptr;
    const InterpolationData* data = nullptr;  ///< optional, for residuals
};

inline ComparisonReport compare_models(const SemiExplicitDae& full,
                                       const std::vector<NamedRom>& roms,
                                       const std::vector<double>& omegas,
                                       bool with_h2_error = false) {
    ComparisonReport report;
    report.omega = omegas;
    const FrequencyResponse fom_fr = frequency_response(full, omegas);
    for (const NamedRom& entry : roms) {
        const ReducedModel& rom = *entry.rom;
        ModelDiagnostics diag;
        diag.name = entry.name;
        diag.order = rom.order();
        const StabilityResult st = stability_check(rom);
        diag.stable = st.stable;
        diag.spectral_abscissa = st.spectrum.finite.empty() ? 0.0 : st.spectrum.max_real();
        const RomDissipativity dis = rom_dissipativity(rom);
        diag.dissipative = dis.dissipative;
        diag.er_min_eig = dis.er_min_eig;
        diag.ar_symmpart_max_eig = dis.ar_symmpart_max_eig;
        if (with_h2_error && st.stable) {
            try {
                diag.h2_error = h2_error_direct(full, rom);
            } catch (const Error&) {
                diag.h2_error = std::nullopt;
            }
        }
        if (entry.data)
            diag.interpolation_residuals = interpolation_residuals(full, rom, *entry.data);
        diag.error_magnitude.reserve(omegas.size());
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            if (!fom_fr.valid[i]) {
                diag.error_magnitude.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            const CMat gr = transfer_eval(rom, Complex(0.0, omegas[i]));
            diag.error_magnitude.push_back((fom_fr.value[i] - gr).cwiseAbs().maxCoeff());
        }
        report.models.push_back(std::move(diag));
    }
    return report;
}

} // namespace semor
