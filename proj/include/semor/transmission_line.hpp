#pragma once

#include <vector>

#include "semor/model.hpp"

namespace semor {

/// RLC ladder discretization of a transmission line. Parameters are per-loop
/// values; the defaults are the telephone-line constants (per meter) applied
/// to unit-length segments.
struct TransmissionLineParams {
    enum class OutputTap { end_capacitor_voltage, first_inductor_voltage };

    Index q = 10;                  ///< number of loops
    double r_per = 172.24e-3;      ///< Ohm per loop
    double l_per = 0.61e-6;        ///< H per loop
    double c_per = 51.57e-12;      ///< F per loop
    OutputTap output_tap = OutputTap::end_capacitor_voltage;

    void validate() const {
        if (q < 1) throw Error("TransmissionLineParams: q must be >= 1");
        if (!(r_per > 0.0) || !(l_per > 0.0) || !(c_per > 0.0))
            throw Error("TransmissionLineParams: all parameters must be positive");
    }
};

/// Builds the order-5q SE-DAE of the transmission line. States are stacked
/// as [I_R; U_C | U_R; I_C; U_L] (loop currents and capacitor voltages are
/// dynamic, n_dyn = 2q). The input is the source voltage U_0, entering the
/// loop equations through the algebraic rows (so b22 != 0); the output taps
/// either the last capacitor voltage (c22 = 0) or the first inductor voltage
/// (implicit feedthrough).
inline SemiExplicitDae build_transmission_line(const TransmissionLineParams& params) {
    params.validate();
    const Index q = params.q;
    using T = Eigen::Triplet<double>;

    // dynamic block: diag(L_1..L_q, C_1..C_q)
    std::vector<T> te;
    for (Index i = 0; i < q; ++i) te.emplace_back(i, i, params.l_per);
    for (Index i = 0; i < q; ++i) te.emplace_back(q + i, q + i, params.c_per);
    SpMat e11(2 * q, 2 * q);
    e11.setFromTriplets(te.begin(), te.end());

    // a11 = 0: the dynamic equations couple only into algebraic variables.
    SpMat a11(2 * q, 2 * q);

    // a12: L_i I_R' = U_L_i ; C_i U_C' = I_C_i   (x2 = [U_R; I_C; U_L])
    std::vector<T> t12;
    for (Index i = 0; i < q; ++i) t12.emplace_back(i, 2 * q + i, 1.0);
    for (Index i = 0; i < q; ++i) t12.emplace_back(q + i, q + i, 1.0);
    SpMat a12(2 * q, 3 * q);
    a12.setFromTriplets(t12.begin(), t12.end());

    // algebraic rows: Ohm's law, current balance, loop voltage balance
    std::vector<T> t21, t22;
    for (Index i = 0; i < q; ++i) {
        // U_R_i - R_i I_R_i = 0
        t21.emplace_back(i, i, -params.r_per);
        t22.emplace_back(i, i, 1.0);
        // I_R_i - I_R_{i+1} - I_C_i = 0
        t21.emplace_back(q + i, i, 1.0);
        if (i + 1 < q) t21.emplace_back(q + i, i + 1, -1.0);
        t22.emplace_back(q + i, q + i, -1.0);
        // U_C_i - U_C_{i-1} + U_R_i + U_L_i = delta_B U_0
        t21.emplace_back(2 * q + i, q + i, 1.0);
        if (i > 0) t21.emplace_back(2 * q + i, q + i - 1, -1.0);
        t22.emplace_back(2 * q + i, i, 1.0);
        t22.emplace_back(2 * q + i, 2 * q + i, 1.0);
    }
    SpMat a21(3 * q, 2 * q), a22(3 * q, 3 * q);
    a21.setFromTriplets(t21.begin(), t21.end());
    a22.setFromTriplets(t22.begin(), t22.end());

    Mat b11 = Mat::Zero(2 * q, 1);
    Mat b22 = Mat::Zero(3 * q, 1);
    b22(2 * q, 0) = -1.0;  // -delta_B in the loop-voltage rows

    Mat c11 = Mat::Zero(1, 2 * q);
    Mat c22 = Mat::Zero(1, 3 * q);
    if (params.output_tap == TransmissionLineParams::OutputTap::end_capacitor_voltage)
        c11(0, 2 * q - 1) = 1.0;  // U_C_q
    else
        c22(0, 2 * q) = 1.0;      // U_L_1

    return SemiExplicitDae(std::move(e11), std::move(a11), std::move(a12), std::move(a21),
                           std::move(a22), std::move(b11), std::move(b22), std::move(c11),
                           std::move(c22), Mat::Zero(1, 1));
}

} // namespace semor
