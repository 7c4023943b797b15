#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isothermic/loopgroup.hpp"

namespace isothermic {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

template <class S>
json multivector_to_json(const Multivector<S>& m) {
    json j;
    j["signature"] = {m.sig().p, m.sig().q};
    j["complex"] = scalar_traits<S>::is_complex;
    json coeffs = json::array();
    for (std::uint32_t b = 0; b < m.size(); ++b) {
        if constexpr (scalar_traits<S>::is_complex)
            coeffs.push_back({m[b].real(), m[b].imag()});
        else
            coeffs.push_back(m[b]);
    }
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline Mv multivector_from_json(const json& j) {
    if (!j.contains("signature") || !j.contains("coeffs"))
        fail(errc::spec_invalid, "multivector JSON needs signature and coeffs");
    Signature sig = make_signature(j["signature"][0].get<int>(), j["signature"][1].get<int>());
    Mv m(sig);
    const auto& coeffs = j["coeffs"];
    if (coeffs.size() != sig.blades()) fail(errc::spec_invalid, "coefficient count mismatch");
    for (std::uint32_t b = 0; b < sig.blades(); ++b) m[b] = coeffs[b].get<double>();
    return m;
}

inline json grid_header_json(const SurfaceGrid& g) {
    json j;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["hx"] = g.hx;
    j["hy"] = g.hy;
    j["x0"] = g.x0;
    j["y0"] = g.y0;
    j["ambient_dim"] = g.dim;
    j["base_index"] = {g.i0, g.j0};
    j["masked"] = g.count_masked();
    return j;
}

// JSON header plus CSV node table (x, y, v_1..v_n, mask).
inline void save_grid(const SurfaceGrid& g, const std::filesystem::path& json_path) {
    std::filesystem::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    json j = grid_header_json(g);
    j["csv"] = csv_path.filename().string();

    std::ofstream jf(json_path);
    if (!jf) fail(errc::io_error, "cannot open " + json_path.string());
    jf << j.dump(2) << "\n";

    std::ofstream cf(csv_path);
    if (!cf) fail(errc::io_error, "cannot open " + csv_path.string());
    cf << "x,y";
    for (int k = 0; k < g.dim; ++k) cf << ",v" << (k + 1);
    cf << ",mask\n";
    for (int j2 = 0; j2 < g.ny; ++j2)
        for (int i = 0; i < g.nx; ++i) {
            cf << format_double(g.x(i)) << "," << format_double(g.y(j2));
            auto v = g.at(i, j2);
            for (int k = 0; k < g.dim; ++k) cf << "," << format_double(v[k]);
            cf << "," << (g.valid(i, j2) ? 1 : 0) << "\n";
        }
}

inline SurfaceGrid load_grid(const std::filesystem::path& json_path) {
    std::ifstream jf(json_path);
    if (!jf) fail(errc::io_error, "cannot open " + json_path.string());
    json j;
    try {
        jf >> j;
    } catch (const std::exception& e) {
        fail(errc::spec_invalid, std::string("grid JSON parse: ") + e.what());
    }
    for (const char* key : {"nx", "ny", "hx", "hy", "x0", "y0", "ambient_dim"})
        if (!j.contains(key)) fail(errc::spec_invalid, std::string("grid JSON missing ") + key);
    SurfaceGrid g(j["nx"].get<int>(), j["ny"].get<int>(), j["hx"].get<double>(),
                  j["hy"].get<double>(), j["x0"].get<double>(), j["y0"].get<double>(),
                  j["ambient_dim"].get<int>());
    if (j.contains("base_index")) {
        g.i0 = j["base_index"][0].get<int>();
        g.j0 = j["base_index"][1].get<int>();
    }
    if (!j.contains("csv")) fail(errc::spec_invalid, "grid JSON missing csv table reference");
    std::filesystem::path csv_path = json_path.parent_path() / j["csv"].get<std::string>();
    std::ifstream cf(csv_path);
    if (!cf) fail(errc::io_error, "cannot open " + csv_path.string());
    std::string line;
    std::getline(cf, line);  // header
    for (int j2 = 0; j2 < g.ny; ++j2)
        for (int i = 0; i < g.nx; ++i) {
            if (!std::getline(cf, line)) fail(errc::io_error, "csv table truncated");
            std::stringstream ss(line);
            std::string cell;
            std::vector<double> row;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            if (static_cast<int>(row.size()) != g.dim + 3)
                fail(errc::spec_invalid, "csv row width mismatch");
            auto dst = g.at(i, j2);
            for (int k = 0; k < g.dim; ++k) dst[k] = row[2 + k];
            g.set_mask(i, j2, row[g.dim + 2] != 0);
        }
    return g;
}

// Quad mesh export; faces touching masked nodes are omitted.  Output bytes
// are a deterministic function of the grid.
inline void export_mesh(const SurfaceGrid& g, const std::filesystem::path& path,
                        const std::string& format, std::array<int, 3> axes) {
    for (int a : axes)
        if (a < 0 || a >= g.dim) fail(errc::bad_axes, "axis index out of range");
    if (format != "obj" && format != "ply") fail(errc::invalid_params, "format must be obj or ply");

    std::vector<std::array<int, 4>> faces;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            if (!g.valid(i, j) || !g.valid(i + 1, j) || !g.valid(i + 1, j + 1) ||
                !g.valid(i, j + 1))
                continue;
            faces.push_back({int(g.node(i, j)), int(g.node(i + 1, j)), int(g.node(i + 1, j + 1)),
                             int(g.node(i, j + 1))});
        }

    std::ofstream out(path);
    if (!out) fail(errc::io_error, "cannot open " + path.string());
    if (format == "obj") {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                auto v = g.at(i, j);
                out << "v " << format_double(v[axes[0]]) << " " << format_double(v[axes[1]]) << " "
                    << format_double(v[axes[2]]) << "\n";
            }
        for (const auto& f : faces)
            out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << " " << f[3] + 1
                << "\n";
    } else {
        out << "ply\nformat ascii 1.0\n";
        out << "element vertex " << std::size_t(g.nx) * g.ny << "\n";
        out << "property double x\nproperty double y\nproperty double z\n";
        out << "element face " << faces.size() << "\n";
        out << "property list uchar int vertex_indices\nend_header\n";
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                auto v = g.at(i, j);
                out << format_double(v[axes[0]]) << " " << format_double(v[axes[1]]) << " "
                    << format_double(v[axes[2]]) << "\n";
            }
        for (const auto& f : faces)
            out << "4 " << f[0] << " " << f[1] << " " << f[2] << " " << f[3] << "\n";
    }
}

inline json simple_factor_to_json(const SimpleFactor& p) {
    json j;
    j["alpha"] = {p.alpha.real(), p.alpha.imag()};
    j["seed_v"] = p.seed_v;
    j["f_o"] = p.f_o;
    return j;
}

inline SimpleFactor simple_factor_from_json(const json& j) {
    if (!j.contains("alpha") || !j.contains("seed_v") || !j.contains("f_o"))
        fail(errc::spec_invalid, "simple factor JSON needs alpha, seed_v, f_o");
    cplx alpha(j["alpha"][0].get<double>(), j["alpha"][1].get<double>());
    std::vector<double> v = j["seed_v"].get<std::vector<double>>();
    std::vector<double> fo = j["f_o"].get<std::vector<double>>();
    return make_simple_factor(alpha, v, fo);
}

// Per-lambda CSV matrices of a frame field for debugging.
inline void export_frame_csv(const ExtendedFrameField& phi, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < phi.lambdas.size(); ++k) {
        std::ostringstream name;
        name << "frame_lambda_" << k << ".csv";
        std::ofstream out(dir / name.str());
        if (!out) fail(errc::io_error, "cannot open frame csv");
        out << "# lambda = " << format_double(phi.lambdas[k].real()) << " + "
            << format_double(phi.lambdas[k].imag()) << "i\n";
        const auto& fr = phi.frames[k];
        for (int j = 0; j < phi.domain.ny; ++j)
            for (int i = 0; i < phi.domain.nx; ++i) {
                out << i << "," << j;
                const VahlenC& m = fr.at(i, j);
                for (const MvC* blk : {&m.a, &m.b, &m.c, &m.d})
                    for (std::uint32_t b = 0; b < blk->size(); ++b)
                        out << "," << format_double((*blk)[b].real()) << ","
                            << format_double((*blk)[b].imag());
                out << "\n";
            }
    }
}

}  // namespace isothermic
