#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semor/adaptive.hpp"
#include "semor/analysis.hpp"
#include "semor/matrix_market.hpp"
#include "semor/sdtransform.hpp"

namespace semor {

using nlohmann::json;

inline json matrix_to_json(const Mat& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            data[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Mat matrix_from_json(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
        throw IoError("matrix_from_json: data length does not match dimensions");
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j2 = 0; j2 < cols; ++j2)
            m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)].get<double>();
    return m;
}

// ---------------------------------------------------------------------------
// Reduced models
// ---------------------------------------------------------------------------

inline json rom_to_json(const ReducedModel& rom) {
    json j{{"method", rom.method},
           {"order", rom.order()},
           {"er", matrix_to_json(rom.er)},
           {"ar", matrix_to_json(rom.ar)},
           {"br", matrix_to_json(rom.br)},
           {"cr", matrix_to_json(rom.cr)},
           {"dr", matrix_to_json(rom.dr)},
           {"d_imp", matrix_to_json(rom.d_imp)}};
    json shifts = json::array();
    for (const Complex& s : rom.shifts) shifts.push_back({s.real(), s.imag()});
    j["shifts"] = shifts;
    return j;
}

inline ReducedModel rom_from_json(const json& j) {
    ReducedModel rom;
    rom.method = j.value("method", "");
    rom.er = matrix_from_json(j.at("er"));
    rom.ar = matrix_from_json(j.at("ar"));
    rom.br = matrix_from_json(j.at("br"));
    rom.cr = matrix_from_json(j.at("cr"));
    rom.dr = matrix_from_json(j.at("dr"));
    if (j.contains("d_imp")) rom.d_imp = matrix_from_json(j.at("d_imp"));
    if (j.contains("shifts"))
        for (const auto& s : j.at("shifts"))
            rom.shifts.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    return rom;
}

inline void write_rom_json(const std::string& path, const ReducedModel& rom) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << rom_to_json(rom).dump(2) << "\n";
}

inline ReducedModel read_rom_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    in >> j;
    return rom_from_json(j);
}

/// Per-matrix Matrix Market export (Er.mtx, Ar.mtx, ...).
inline void write_rom_matrix_market(const std::string& dir, const ReducedModel& rom) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);
    write_matrix_market((base / "Er.mtx").string(), rom.er);
    write_matrix_market((base / "Ar.mtx").string(), rom.ar);
    write_matrix_market((base / "Br.mtx").string(), rom.br);
    write_matrix_market((base / "Cr.mtx").string(), rom.cr);
    write_matrix_market((base / "Dr.mtx").string(), rom.dr);
}

// ---------------------------------------------------------------------------
// Frequency responses
// ---------------------------------------------------------------------------

/// CSV with header omega,re_ij,im_ij,... in row-major channel order.
inline void write_frequency_response_csv(const std::string& path, const FrequencyResponse& fr) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    Index p = 0, m = 0;
    for (std::size_t k = 0; k < fr.value.size(); ++k)
        if (fr.valid[k]) {
            p = fr.value[k].rows();
            m = fr.value[k].cols();
            break;
        }
    out << "omega";
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
            out << ",re_" << i << j << ",im_" << i << j;
    out << "\n";
    for (std::size_t k = 0; k < fr.omega.size(); ++k) {
        out << fr.omega[k];
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j) {
                if (fr.valid[k])
                    out << "," << fr.value[k](i, j).real() << "," << fr.value[k](i, j).imag();
                else
                    out << ",nan,nan";
            }
        out << "\n";
    }
}

/// Bode magnitude CSV: omega,mag_db_ij,...
inline void write_bode_csv(const std::string& path, const FrequencyResponse& fr) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    Index p = 0, m = 0;
    for (std::size_t k = 0; k < fr.value.size(); ++k)
        if (fr.valid[k]) {
            p = fr.value[k].rows();
            m = fr.value[k].cols();
            break;
        }
    out << "omega";
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
            out << ",mag_db_" << i << j;
    out << "\n";
    for (std::size_t k = 0; k < fr.omega.size(); ++k) {
        out << fr.omega[k];
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j) {
                if (fr.valid[k])
                    out << "," << 20.0 * std::log10(std::max(std::abs(fr.value[k](i, j)), 1e-300));
                else
                    out << ",nan";
            }
        out << "\n";
    }
}

inline json frequency_response_to_json(const FrequencyResponse& fr) {
    json points = json::array();
    for (std::size_t k = 0; k < fr.omega.size(); ++k) {
        json pt{{"omega", fr.omega[k]}, {"valid", static_cast<bool>(fr.valid[k])}};
        if (fr.valid[k]) {
            json re = json::array(), im = json::array();
            for (Index i = 0; i < fr.value[k].rows(); ++i)
                for (Index j = 0; j < fr.value[k].cols(); ++j) {
                    re.push_back(fr.value[k](i, j).real());
                    im.push_back(fr.value[k](i, j).imag());
                }
            pt["re"] = re;
            pt["im"] = im;
        }
        points.push_back(pt);
    }
    return json{{"points", points}};
}

inline void write_frequency_response_json(const std::string& path, const FrequencyResponse& fr) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << frequency_response_to_json(fr).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Comparison report
// ---------------------------------------------------------------------------

inline json comparison_to_json(const ComparisonReport& report) {
    json models = json::array();
    for (const auto& m : report.models) {
        json j{{"name", m.name},
               {"order", m.order},
               {"stable", m.stable},
               {"spectral_abscissa", m.spectral_abscissa},
               {"dissipative", m.dissipative},
               {"er_min_eig", m.er_min_eig},
               {"ar_symmpart_max_eig", m.ar_symmpart_max_eig},
               {"interpolation_residuals", m.interpolation_residuals},
               {"error_magnitude", m.error_magnitude}};
        if (m.h2_error) j["h2_error"] = *m.h2_error;
        models.push_back(j);
    }
    return json{{"omega", report.omega}, {"models", models}};
}

inline void write_comparison_json(const std::string& path, const ComparisonReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << comparison_to_json(report).dump(2) << "\n";
}

/// Table-style CSV: one row per model with the stability/dissipativity flags.
inline void write_comparison_csv(const std::string& path, const ComparisonReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "model,order,dissipative,stable,spectral_abscissa,er_min_eig,ar_symmpart_max_eig,"
           "max_error_magnitude,h2_error\n";
    for (const auto& m : report.models) {
        double max_err = 0.0;
        for (double v : m.error_magnitude)
            if (std::isfinite(v)) max_err = std::max(max_err, v);
        out << m.name << "," << m.order << "," << (m.dissipative ? "yes" : "no") << ","
            << (m.stable ? "yes" : "no") << "," << m.spectral_abscissa << "," << m.er_min_eig
            << "," << m.ar_symmpart_max_eig << "," << max_err << ",";
        if (m.h2_error) out << *m.h2_error;
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// CURE run log and transform record
// ---------------------------------------------------------------------------

/// JSON-lines, one object per CURE step.
inline void write_cure_log_jsonl(const std::string& path, const CureState& state) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& rec : state.history()) {
        json shifts = json::array();
        for (const Complex& s : rec.shifts) shifts.push_back({s.real(), s.imag()});
        json j{{"k", rec.k},
               {"shifts", shifts},
               {"step_norm_sq", rec.step_norm_sq},
               {"rel_contribution", rec.rel_contribution},
               {"cumulative_order", rec.cumulative_order},
               {"stable", rec.stable}};
        out << j.dump() << "\n";
    }
}

inline void write_sd_record_json(const std::string& path, const SdTransformRecord& rec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    json j{{"q_choice", rec.q_choice},
           {"lyapunov_residual", rec.lyapunov_residual},
           {"p_min_eig", rec.p_min_eig},
           {"p_max_eig", rec.p_max_eig},
           {"p", matrix_to_json(rec.p)}};
    out << j.dump(2) << "\n";
}

} // namespace semor
