#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semor/model.hpp"

namespace semor {

// ---------------------------------------------------------------------------
// Matrix Market coordinate I/O (real, general; symmetric accepted on read)
// ---------------------------------------------------------------------------

struct MatrixMarketData {
    Index rows = 0, cols = 0;
    std::vector<Eigen::Triplet<double>> entries;

    SpMat to_sparse() const {
        SpMat m(rows, cols);
        m.setFromTriplets(entries.begin(), entries.end());
        m.prune(0.0, 0.0);
        return m;
    }
    Mat to_dense() const {
        Mat m = Mat::Zero(rows, cols);
        for (const auto& t : entries) m(t.row(), t.col()) += t.value();
        return m;
    }
};

inline MatrixMarketData read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix market file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty matrix market file: " + path);
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    };
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw IoError("unsupported matrix market header in " + path + ": " + line);
    const std::string fld = lower(field), sym = lower(symmetry);
    if (fld != "real" && fld != "integer")
        throw IoError("only real coordinate matrices are supported: " + path);
    if (sym != "general" && sym != "symmetric")
        throw IoError("unsupported symmetry '" + sym + "' in " + path);

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    MatrixMarketData data;
    Index nnz = 0;
    {
        std::istringstream sizes(line);
        if (!(sizes >> data.rows >> data.cols >> nnz))
            throw IoError("malformed size line in " + path + ": " + line);
    }
    data.entries.reserve(static_cast<std::size_t>(nnz));
    for (Index k = 0; k < nnz; ++k) {
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw IoError("truncated matrix market file: " + path);
        if (i < 1 || i > data.rows || j < 1 || j > data.cols)
            throw IoError("index out of range in " + path);
        data.entries.emplace_back(i - 1, j - 1, v);
        if (sym == "symmetric" && i != j) data.entries.emplace_back(j - 1, i - 1, v);
    }
    return data;
}

inline void write_matrix_market(const std::string& path, const SpMat& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    out.precision(17);
    for (Index k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

inline void write_matrix_market(const std::string& path, const Mat& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    Index nnz = 0;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) ++nnz;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << nnz << "\n";
    out.precision(17);
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) out << i + 1 << " " << j + 1 << " " << m(i, j) << "\n";
}

// ---------------------------------------------------------------------------
// SE-DAE ingestion: symmetric permutation to semi-explicit form
// ---------------------------------------------------------------------------

struct LoadedModel {
    SemiExplicitDae dae;
    std::vector<Index> permutation;  ///< new position k holds original index permutation[k]
    bool identity_permutation = true;
};

/// Symmetrically permutes (E, A, B, C) so that zero rows/columns of E come
/// last, then splits into the semi-explicit blocks. Throws NotSemiExplicit
/// when the nonzero block of E cannot be isolated this way or when the
/// resulting e11/a22 are singular.
inline LoadedModel assemble_semi_explicit(const SpMat& e_in, const SpMat& a_in, const Mat& b,
                                          const Mat& c, const Mat& d,
                                          std::optional<Index> known_n_dyn = std::nullopt) {
    const Index n = e_in.rows();
    if (e_in.cols() != n || a_in.rows() != n || a_in.cols() != n || b.rows() != n || c.cols() != n)
        throw DimensionMismatchError("assemble_semi_explicit: E/A/B/C dimensions inconsistent");

    SpMat e = e_in;
    e.prune(0.0, 0.0);

    std::vector<bool> dynamic(n, false);
    for (Index k = 0; k < e.outerSize(); ++k)
        for (SpMat::InnerIterator it(e, k); it; ++it) {
            dynamic[it.row()] = true;
            dynamic[it.col()] = true;
        }

    std::vector<Index> perm;
    perm.reserve(n);
    for (Index i = 0; i < n; ++i)
        if (dynamic[i]) perm.push_back(i);
    const Index nd = static_cast<Index>(perm.size());
    for (Index i = 0; i < n; ++i)
        if (!dynamic[i]) perm.push_back(i);

    if (nd == 0)
        throw NotSemiExplicitError("assemble_semi_explicit: E has no nonzero entries");
    if (known_n_dyn && *known_n_dyn != nd)
        throw NotSemiExplicitError("assemble_semi_explicit: declared n_dyn " +
                                   std::to_string(*known_n_dyn) + " does not match detected " +
                                   std::to_string(nd));

    std::vector<Index> pos(n);
    for (Index k = 0; k < n; ++k) pos[perm[k]] = k;

    const Index na = n - nd;
    std::vector<Eigen::Triplet<double>> te11, ta11, ta12, ta21, ta22;
    for (Index k = 0; k < e.outerSize(); ++k)
        for (SpMat::InnerIterator it(e, k); it; ++it)
            te11.emplace_back(pos[it.row()], pos[it.col()], it.value());
    for (Index k = 0; k < a_in.outerSize(); ++k)
        for (SpMat::InnerIterator it(a_in, k); it; ++it) {
            const Index i = pos[it.row()], j = pos[it.col()];
            if (it.value() == 0.0) continue;
            if (i < nd && j < nd) ta11.emplace_back(i, j, it.value());
            else if (i < nd) ta12.emplace_back(i, j - nd, it.value());
            else if (j < nd) ta21.emplace_back(i - nd, j, it.value());
            else ta22.emplace_back(i - nd, j - nd, it.value());
        }

    SpMat e11(nd, nd), a11(nd, nd), a12(nd, na), a21(na, nd), a22(na, na);
    e11.setFromTriplets(te11.begin(), te11.end());
    a11.setFromTriplets(ta11.begin(), ta11.end());
    a12.setFromTriplets(ta12.begin(), ta12.end());
    a21.setFromTriplets(ta21.begin(), ta21.end());
    a22.setFromTriplets(ta22.begin(), ta22.end());

    Mat b11(nd, b.cols()), b22(na, b.cols()), c11(c.rows(), nd), c22(c.rows(), na);
    for (Index k = 0; k < n; ++k) {
        if (k < nd) {
            b11.row(k) = b.row(perm[k]);
            c11.col(k) = c.col(perm[k]);
        } else {
            b22.row(k - nd) = b.row(perm[k]);
            c22.col(k - nd) = c.col(perm[k]);
        }
    }

    try {
        LoadedModel out{SemiExplicitDae(std::move(e11), std::move(a11), std::move(a12),
                                        std::move(a21), std::move(a22), std::move(b11),
                                        std::move(b22), std::move(c11), std::move(c22), d),
                        perm, true};
        for (Index k = 0; k < n; ++k)
            if (perm[k] != k) {
                out.identity_permutation = false;
                break;
            }
        return out;
    } catch (const SingularMatrixError& err) {
        throw NotSemiExplicitError(std::string("assemble_semi_explicit: ") + err.what());
    }
}

// ---------------------------------------------------------------------------
// Sidecar config
// ---------------------------------------------------------------------------

/// JSON sidecar naming the matrix files of one model:
///   {"e": "E.mtx", "a": "A.mtx", "b": "B.mtx", "c": "C.mtx",
///    "d": "D.mtx" (optional), "n_dyn": 20 (optional)}
/// Paths are resolved relative to the config file's directory.
inline LoadedModel load_matrix_market(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open model config: " + config_path);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& err) {
        throw IoError("malformed model config " + config_path + ": " + err.what());
    }
    const auto dir = std::filesystem::path(config_path).parent_path();
    auto resolve = [&](const std::string& name) { return (dir / name).string(); };

    for (const char* key : {"e", "a", "b", "c"})
        if (!cfg.contains(key))
            throw IoError("model config missing key '" + std::string(key) + "': " + config_path);

    const SpMat e = read_matrix_market(resolve(cfg["e"])).to_sparse();
    const SpMat a = read_matrix_market(resolve(cfg["a"])).to_sparse();
    const Mat b = read_matrix_market(resolve(cfg["b"])).to_dense();
    const Mat c = read_matrix_market(resolve(cfg["c"])).to_dense();
    Mat d = Mat::Zero(c.rows(), b.cols());
    if (cfg.contains("d") && !cfg["d"].is_null()) d = read_matrix_market(resolve(cfg["d"])).to_dense();
    std::optional<Index> n_dyn;
    if (cfg.contains("n_dyn") && !cfg["n_dyn"].is_null()) n_dyn = cfg["n_dyn"].get<Index>();

    return assemble_semi_explicit(e, a, b, c, d, n_dyn);
}

/// Writes a model as Matrix Market files plus the sidecar config consumed by
/// load_matrix_market().
inline void write_model(const std::string& dir, const SemiExplicitDae& dae) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);
    write_matrix_market((base / "E.mtx").string(), dae.e_full());
    write_matrix_market((base / "A.mtx").string(), dae.a_full());
    write_matrix_market((base / "B.mtx").string(), dae.b_full());
    write_matrix_market((base / "C.mtx").string(), dae.c_full());
    write_matrix_market((base / "D.mtx").string(), dae.d());
    nlohmann::json cfg{{"e", "E.mtx"}, {"a", "A.mtx"}, {"b", "B.mtx"},
                       {"c", "C.mtx"}, {"d", "D.mtx"}, {"n_dyn", dae.n_dyn()}};
    std::ofstream out((base / "system.json").string());
    if (!out) throw IoError("cannot write sidecar config in " + dir);
    out << cfg.dump(2) << "\n";
}

} // namespace semor
