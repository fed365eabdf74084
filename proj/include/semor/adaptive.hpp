#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "semor/reduce.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// CURE: cumulative reduction
// ---------------------------------------------------------------------------

struct CureStepRecord {
    Index k = 0;
    std::vector<Complex> shifts;
    double step_norm_sq = 0.0;      ///< ||G_{r,k}||_H2^2 of the step model
    double rel_contribution = 1.0;  ///< step_norm_sq / sum of all step norms so far
    Index cumulative_order = 0;
    bool stable = false;
};

/// Bookkeeping of the cumulative reduction G = G_{r,k}^Sigma + G_bot,k * Gtilde_k^Sigma
/// (input side; the output side composes the factors in the mirrored order).
/// The cumulated matrices grow block-wise per step:
///
///   A_Sigma <- [A_Sigma, 0; B_rk R_Sigma, A_rk]   (input side)
///   B_Sigma <- [B_Sigma; B_rk],  C_Sigma <- [C_Sigma, C_rk],  R_Sigma <- [R_Sigma, R_k]
///   B_bot   <- B_bot - E V_k B_rk
///
/// All step models come from PORK, so E_r = I throughout.
class CureState {
public:
    CureState(SemiExplicitDae strictly_proper_model, Side side, Mat total_feedthrough)
        : work_(std::move(strictly_proper_model)), side_(side),
          d_total_(std::move(total_feedthrough)) {
        const Index m = work_.num_inputs(), p = work_.num_outputs();
        a_sig_ = Mat(0, 0);
        b_sig_ = Mat(0, m);
        c_sig_ = Mat(p, 0);
        dirs_sig_ = side_ == Side::input ? Mat(m, 0) : Mat(0, p);
        v_acc_ = Mat(work_.order(), 0);
        if (side_ == Side::input)
            perp_ = work_.b_full();
        else
            perp_ = work_.c_full();
    }

    Side side() const { return side_; }
    Index iteration() const { return static_cast<Index>(history_.size()); }
    Index cumulative_order() const { return a_sig_.rows(); }
    const SemiExplicitDae& working_model() const { return work_; }
    const Mat& perp() const { return perp_; }
    const Mat& accumulated_basis() const { return v_acc_; }
    const std::vector<CureStepRecord>& history() const { return history_; }
    double total_norm_sq() const { return norm_sq_sum_; }
    const Mat& total_feedthrough() const { return d_total_; }

    /// The remaining high-dimensional error factor G_bot (input side: B
    /// replaced by B_bot; output side: C replaced by C_bot).
    SemiExplicitDae error_factor() const {
        const Index nd = work_.n_dyn();
        if (side_ == Side::input)
            return work_.with_inputs(perp_.topRows(nd), perp_.bottomRows(work_.n_alg()));
        return work_.with_outputs(perp_.leftCols(nd), perp_.rightCols(work_.n_alg()));
    }

    /// Cumulated reduced model G_{r,k}^Sigma; the total feedthrough d + D_imp
    /// is attached only to the final model, the running factorization
    /// identity holds against the strictly proper original.
    ReducedModel cumulated_rom(bool with_feedthrough) const {
        ReducedModel rom;
        rom.method = side_ == Side::input ? "cure-v" : "cure-w";
        rom.er = Mat::Identity(cumulative_order(), cumulative_order());
        rom.ar = a_sig_;
        rom.br = b_sig_;
        rom.cr = c_sig_;
        rom.dr = with_feedthrough ? d_total_
                                  : Mat::Zero(work_.num_outputs(), work_.num_inputs());
        rom.d_imp = d_total_;
        for (const auto& rec : history_)
            rom.shifts.insert(rom.shifts.end(), rec.shifts.begin(), rec.shifts.end());
        return rom;
    }

    /// The low-dimensional error factor Gtilde_k^Sigma (unity feedthrough,
    /// tangential directions as output/input matrix).
    ReducedModel gtilde_sigma() const {
        ReducedModel g;
        g.method = "cure-gtilde";
        const Index n = cumulative_order();
        g.er = Mat::Identity(n, n);
        g.ar = a_sig_;
        if (side_ == Side::input) {
            g.br = b_sig_;
            g.cr = dirs_sig_;  // R_Sigma, m x n
            g.dr = Mat::Identity(work_.num_inputs(), work_.num_inputs());
        } else {
            g.br = dirs_sig_;  // L_Sigma, n x p
            g.cr = c_sig_;
            g.dr = Mat::Identity(work_.num_outputs(), work_.num_outputs());
        }
        return g;
    }

    /// Absorbs one PORK step computed on the current error factor.
    void step(const ReducedModel& step_rom, const KrylovBasis& step_basis) {
        const Index nk = step_rom.order();
        const Index n0 = cumulative_order();
        if (step_basis.order() != nk || step_basis.side() != side_)
            throw DimensionMismatchError("cure_step: basis does not match the step model");
        if (step_rom.num_inputs() != work_.num_inputs() ||
            step_rom.num_outputs() != work_.num_outputs() ||
            step_basis.v.rows() != work_.order())
            throw DimensionMismatchError("cure_step: step model dimensions do not match");
        if (max_abs(Mat(step_rom.er - Mat::Identity(nk, nk))) != 0.0)
            throw Error("cure_step: step models must have E_r = I (PORK form)");
        if (max_abs(step_rom.dr) != 0.0)
            throw Error("cure_step: step models of the strictly proper part must have D_r = 0");

        const Mat& dirs = step_basis.data.dirs;
        Mat a_new(n0 + nk, n0 + nk);
        a_new.setZero();
        a_new.topLeftCorner(n0, n0) = a_sig_;
        a_new.bottomRightCorner(nk, nk) = step_rom.ar;
        if (side_ == Side::input) {
            if (n0 > 0) a_new.bottomLeftCorner(nk, n0) = step_rom.br * dirs_sig_;
            dirs_sig_.conservativeResize(Eigen::NoChange, n0 + nk);
            dirs_sig_.rightCols(nk) = dirs;
            perp_ -= (work_.e_full() * step_basis.v) * step_rom.br;
        } else {
            if (n0 > 0) a_new.topRightCorner(n0, nk) = dirs_sig_ * step_rom.cr;
            dirs_sig_.conservativeResize(n0 + nk, Eigen::NoChange);
            dirs_sig_.bottomRows(nk) = dirs;
            perp_ -= step_rom.cr * (step_basis.v.transpose() * work_.e_full());
        }
        a_sig_ = std::move(a_new);
        b_sig_.conservativeResize(n0 + nk, Eigen::NoChange);
        b_sig_.bottomRows(nk) = step_rom.br;
        c_sig_.conservativeResize(Eigen::NoChange, n0 + nk);
        c_sig_.rightCols(nk) = step_rom.cr;
        v_acc_.conservativeResize(Eigen::NoChange, n0 + nk);
        v_acc_.rightCols(nk) = step_basis.v;

        CureStepRecord rec;
        rec.k = iteration() + 1;
        rec.shifts = step_rom.shifts;
        rec.step_norm_sq = step_rom.pork_gramian ? h2_norm_sq_from_gramian(step_rom)
                                                 : std::pow(h2_norm(step_rom), 2);
        norm_sq_sum_ += rec.step_norm_sq;
        // the cumulated model is stable by construction (block triangular with
        // mirrored-shift diagonal blocks), so its norm is well defined
        const double sigma_sq = std::pow(h2_norm(cumulated_rom(false)), 2);
        rec.rel_contribution = sigma_sq > 0.0 ? rec.step_norm_sq / sigma_sq : 1.0;
        rec.cumulative_order = cumulative_order();
        rec.stable = eigenvalues_dense(step_rom.ar).all_in_open_left_half_plane();
        history_.push_back(std::move(rec));
    }

private:
    SemiExplicitDae work_;
    Side side_;
    Mat d_total_;
    Mat perp_;      ///< B_bot (N x m) or C_bot (p x N)
    Mat v_acc_;
    Mat a_sig_, b_sig_, c_sig_, dirs_sig_;
    std::vector<CureStepRecord> history_;
    double norm_sq_sum_ = 0.0;
};

inline CureState cure_step(CureState state, const ReducedModel& step_rom,
                           const KrylovBasis& step_basis) {
    state.step(step_rom, step_basis);
    return state;
}

/// Relative residual of the factorization identity
/// G(s) - G_Sigma(s) - G_bot(s) Gtilde_Sigma(s) (input side; mirrored product
/// order for the output side), evaluated against the strictly proper model
/// held by the state.
inline double cure_factorization_residual(const CureState& state, Complex s) {
    const CMat g = transfer_eval(state.working_model(), s);
    const CMat g_sig = transfer_eval(state.cumulated_rom(false), s);
    const CMat g_bot = transfer_eval(state.error_factor(), s);
    const CMat g_til = transfer_eval(state.gtilde_sigma(), s);
    const CMat lhs = state.side() == Side::input ? CMat(g - g_sig - g_bot * g_til)
                                                 : CMat(g - g_sig - g_til * g_bot);
    const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    return max_abs(lhs) / scale;
}

// ---------------------------------------------------------------------------
// SPARK: greedy order-2 pseudo-optimal shift search
// ---------------------------------------------------------------------------

/// The two SPARK parameters define a mirrored shift pair through
/// p1 = (s1+s2)/2 and p2 = s1 s2: a real pair for p1^2 >= p2, a conjugate
/// pair otherwise. Positivity of both parameters keeps the pair in the open
/// right half-plane.
inline std::vector<Complex> spark_shift_pair(double p1, double p2) {
    const double disc = p1 * p1 - p2;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {Complex(p1 + root, 0.0), Complex(p1 - root, 0.0)};
    }
    const double beta = std::sqrt(p2 - p1 * p1);
    return {Complex(p1, beta), Complex(p1, -beta)};
}

struct SparkOptions {
    double p1_init = 1.0;
    double p2_init = 1.0;
    Index max_evals = 260;
    double grad_rtol = 1e-6;      ///< stop when ||grad J|| < grad_rtol * J
    bool presearch = true;        ///< coarse log-grid scan around the init
    Index presearch_span = 4;     ///< +- decades covered by the scan
    static constexpr double param_floor = 1e-12;
};

struct SparkResult {
    double p1 = 0.0, p2 = 0.0;
    std::vector<Complex> shift_pair;
    ReducedModel rom;
    KrylovBasis basis;
    double norm_sq = 0.0;                         ///< achieved ||G_r||_H2^2
    std::vector<std::array<double, 3>> trace;     ///< accepted (p1, p2, J)
    Index evals = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline InterpolationData spark_data(double p1, double p2, Index channels, Side side) {
    const std::vector<Complex> pair = spark_shift_pair(p1, p2);
    CVec dir = CVec::Ones(channels) / std::sqrt(double(channels));
    std::vector<CVec> dirs{dir, pair[0].imag() == 0.0 ? dir : CVec(dir.conjugate())};
    return shifts_to_sylvester(pair, dirs, side);
}

} // namespace detail

/// Maximizes J(p1,p2) = ||G_r(p1,p2)||_H2^2 over the order-2 pseudo-optimal
/// models of the strictly proper system `g_bot`. Derivative-free scheme:
/// optional coarse log-grid presearch, then finite-difference gradient ascent
/// in log coordinates with a backtracking step; every evaluation is one PORK
/// construction (a single complex or two real shifted solves plus the
/// closed-form Gramian). Iterates are projected onto p1, p2 >= 1e-12.
inline SparkResult spark(const SemiExplicitDae& g_bot, const SparkOptions& opts = {},
                         Side side = Side::input) {
    if (max_abs(g_bot.d()) != 0.0 || max_abs(implicit_feedthrough(g_bot)) > 0.0)
        throw Error("spark: system must be strictly proper (use strictly_proper() first)");
    if (!(opts.p1_init > 0.0) || !(opts.p2_init > 0.0))
        throw OptimizerFailedError("spark: initial parameters must be positive");

    const Index channels = side == Side::input ? g_bot.num_inputs() : g_bot.num_outputs();
    Index evals = 0;
    auto cost = [&](double p1, double p2) -> double {
        ++evals;
        try {
            const ReducedModel rom = pork(g_bot, detail::spark_data(p1, p2, channels, side));
            const double j = h2_norm_sq_from_gramian(rom);
            return std::isfinite(j) ? j : -std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    const double floor_log = std::log10(SparkOptions::param_floor);
    auto project = [&](double u) { return std::max(u, floor_log); };

    std::array<double, 2> u{project(std::log10(opts.p1_init)), project(std::log10(opts.p2_init))};
    double best = cost(std::pow(10.0, u[0]), std::pow(10.0, u[1]));

    SparkResult res;
    if (opts.presearch) {
        for (int i = -int(opts.presearch_span); i <= int(opts.presearch_span); i += 2) {
            for (int j = -int(opts.presearch_span); j <= int(opts.presearch_span); j += 2) {
                if (i == 0 && j == 0) continue;
                const std::array<double, 2> cand{project(u[0] + i), project(u[1] + j)};
                const double val = cost(std::pow(10.0, cand[0]), std::pow(10.0, cand[1]));
                if (val > best) {
                    best = val;
                    u = cand;
                }
            }
        }
    }
    if (!std::isfinite(best))
        throw OptimizerFailedError("spark: no feasible parameter pair found");
    res.trace.push_back({std::pow(10.0, u[0]), std::pow(10.0, u[1]), best});

    const double fd_h = 1e-4;  // log-space step
    double step = 0.25;
    while (evals + 6 <= opts.max_evals) {
        std::array<double, 2> grad_log{};
        for (int i = 0; i < 2; ++i) {
            std::array<double, 2> up = u, dn = u;
            up[i] = project(u[i] + fd_h);
            dn[i] = project(u[i] - fd_h);
            const double f_up = cost(std::pow(10.0, up[0]), std::pow(10.0, up[1]));
            const double f_dn = cost(std::pow(10.0, dn[0]), std::pow(10.0, dn[1]));
            grad_log[i] = (f_up - f_dn) / (up[i] - dn[i]);
        }
        // gradient w.r.t. the raw parameters, for the termination test
        const double ln10 = std::log(10.0);
        const double g1 = grad_log[0] / (std::pow(10.0, u[0]) * ln10);
        const double g2 = grad_log[1] / (std::pow(10.0, u[1]) * ln10);
        res.grad_norm = std::hypot(g1, g2);
        if (res.grad_norm < opts.grad_rtol * std::max(best, 1e-300)) break;

        const double gl_norm = std::hypot(grad_log[0], grad_log[1]);
        if (gl_norm == 0.0) break;
        bool improved = false;
        double t = step;
        while (t > 1e-10 && evals < opts.max_evals) {
            const std::array<double, 2> cand{project(u[0] + t * grad_log[0] / gl_norm),
                                             project(u[1] + t * grad_log[1] / gl_norm)};
            const double val = cost(std::pow(10.0, cand[0]), std::pow(10.0, cand[1]));
            if (val > best) {
                u = cand;
                best = val;
                res.trace.push_back({std::pow(10.0, u[0]), std::pow(10.0, u[1]), best});
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
        step = std::min(1.0, t * 2.0);
    }

    res.p1 = std::pow(10.0, u[0]);
    res.p2 = std::pow(10.0, u[1]);
    res.shift_pair = spark_shift_pair(res.p1, res.p2);
    PorkOutput out = pork_with_basis(g_bot, detail::spark_data(res.p1, res.p2, channels, side));
    res.rom = std::move(out.rom);
    res.basis = std::move(out.basis);
    res.norm_sq = best;
    res.evals = evals;
    return res;
}

// ---------------------------------------------------------------------------
// CURE driver
// ---------------------------------------------------------------------------

struct CureOptions {
    enum class StepMode { spark, fixed_pork };
    enum class Stop { target_order, relative_contribution };

    Side side = Side::input;
    StepMode mode = StepMode::spark;
    Stop stop = Stop::target_order;
    Index target_order = 10;
    double min_rel_contribution = 1e-4;
    Index max_steps = 100;
    SparkOptions spark;
    bool spark_warm_start = true;  ///< reuse the previous optimum as init
    std::vector<InterpolationData> fixed_step_data;  ///< one entry per step in fixed mode
};

struct CureResult {
    CureState state;
    ReducedModel rom;
};

/// Runs cumulative reduction. A nonzero total feedthrough d + D_imp is
/// stripped once up front (side-matching strictly proper realization), the
/// strictly proper part is reduced, and the feedthrough is reattached to the
/// final cumulated model, which keeps every intermediate error factor
/// strictly proper.
inline CureResult cure_run(const SemiExplicitDae& dae, const CureOptions& opts = {}) {
    const Mat dimp = implicit_feedthrough(dae);
    const Mat d_total = dae.d() + dimp;
    const bool needs_strip = max_abs(dimp) != 0.0 || max_abs(dae.d()) != 0.0;
    SemiExplicitDae work = needs_strip ? strictly_proper(dae, opts.side) : dae;

    CureState state(std::move(work), opts.side, d_total);
    SparkOptions spark_opts = opts.spark;

    bool stopped = false;
    for (Index k = 0; k < opts.max_steps && !stopped; ++k) {
        ReducedModel step_rom;
        KrylovBasis step_basis;
        const SemiExplicitDae g_bot = state.error_factor();
        if (opts.mode == CureOptions::StepMode::spark) {
            SparkResult sr = spark(g_bot, spark_opts, opts.side);
            step_rom = std::move(sr.rom);
            step_basis = std::move(sr.basis);
            if (opts.spark_warm_start) {
                spark_opts.p1_init = sr.p1;
                spark_opts.p2_init = sr.p2;
            }
        } else {
            if (static_cast<std::size_t>(k) >= opts.fixed_step_data.size())
                throw StagnationDetectedError(
                    "cure_run: fixed step data exhausted before the stop criterion was met");
            PorkOutput out = pork_with_basis(g_bot, opts.fixed_step_data[k]);
            step_rom = std::move(out.rom);
            step_basis = std::move(out.basis);
        }
        state.step(step_rom, step_basis);

        if (opts.stop == CureOptions::Stop::target_order)
            stopped = state.cumulative_order() >= opts.target_order;
        else
            stopped = state.history().back().rel_contribution < opts.min_rel_contribution;
    }
    if (!stopped)
        throw StagnationDetectedError("cure_run: step budget exhausted before the stop criterion was met");

    CureResult result{state, state.cumulated_rom(true)};
    return result;
}

// ---------------------------------------------------------------------------
// Pseudo-optimal error norm
// ---------------------------------------------------------------------------

/// Eq-style feedthrough-cancelled error: sqrt(||G^sp||^2 - ||G_r^sp||^2).
/// Small negative differences (roundoff) are clamped to zero; a clamp beyond
/// 1e-9 is reported through `clamped`, and a violation beyond the relative
/// tolerance means the model is not actually pseudo-optimal.
inline double h2_error_pseudo_optimal(double norm_g_sp_sq, const ReducedModel& rom,
                                      bool* clamped = nullptr) {
    if (norm_g_sp_sq < 0.0)
        throw Error("h2_error_pseudo_optimal: norm_g_sp_sq must be nonnegative");
    const double rom_sq = std::pow(h2_norm(rom), 2);
    const double diff = norm_g_sp_sq - rom_sq;
    if (diff < -1e-6 * std::max(norm_g_sp_sq, 1e-300))
        throw PseudoOptimalityViolatedError(
            "h2_error_pseudo_optimal: ||G_r|| exceeds ||G||, pseudo-optimality is broken");
    if (clamped) *clamped = diff < -1e-9;
    return std::sqrt(std::max(0.0, diff));
}

} // namespace semor
