#pragma once

#include "isothermic/io.hpp"

namespace isothermic {

// Declarative batch job: seed -> ordered transforms -> verification checks ->
// artifact outputs.  One JSON format; reruns with the same spec produce
// byte-identical artifacts.
struct JobSpec {
    json raw;

    static JobSpec parse(const json& j) {
        JobSpec spec;
        spec.raw = j;
        if (!j.contains("seed") || !j["seed"].contains("kind"))
            fail(errc::spec_invalid, "job needs seed.kind");
        std::string kind = j["seed"]["kind"].get<std::string>();
        if (kind != "plane" && kind != "cylinder" && kind != "revolution")
            fail(errc::spec_invalid, "unknown seed kind '" + kind + "'");
        if (j.contains("resolution")) {
            auto res = j["resolution"];
            if (res[0].get<int>() < 3 || res[1].get<int>() < 3)
                fail(errc::spec_invalid, "resolution must be at least 3x3");
        }
        static const std::vector<std::string> ops{"darboux", "t_transform", "dress_pair_direct",
                                                  "christoffel"};
        if (j.contains("transforms"))
            for (const auto& t : j["transforms"]) {
                if (!t.contains("op")) fail(errc::spec_invalid, "transform entry needs op");
                std::string op = t["op"].get<std::string>();
                if (std::find(ops.begin(), ops.end(), op) == ops.end())
                    fail(errc::spec_invalid, "unknown transform op '" + op + "'");
            }
        static const std::vector<std::string> checks{
            "isothermic_residual", "envelope_residual", "h_surface_invariant",
            "calapso_residual",    "t_plane_closed_form", "darboux_involution"};
        if (j.contains("verify"))
            for (const auto& c : j["verify"]) {
                if (!c.contains("check")) fail(errc::spec_invalid, "verify entry needs check");
                std::string name = c["check"].get<std::string>();
                if (std::find(checks.begin(), checks.end(), name) == checks.end())
                    fail(errc::spec_invalid, "unknown verification '" + name + "'");
                if (c.contains("tol") && !(c["tol"].get<double>() > 0))
                    fail(errc::spec_invalid, "tolerances must be positive");
            }
        return spec;
    }

    static JobSpec load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) fail(errc::io_error, "cannot open " + path.string());
        json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            fail(errc::spec_invalid, std::string("job JSON parse: ") + e.what());
        }
        return parse(j);
    }
};

struct JobReport {
    json report;
    bool pass = true;
};

namespace detail {

inline SeedParams seed_params_from(const json& j) {
    SeedParams p;
    std::string kind = j["seed"]["kind"].get<std::string>();
    if (kind == "cylinder") {
        p.xmin = 0;
        p.xmax = 3.14159265358979323846;
    }
    if (kind == "revolution") {
        p.xmin = -0.8;
        p.xmax = 0.8;
        p.ymin = 0;
        p.ymax = 1.6;
    }
    if (j["seed"].contains("domain")) {
        auto d = j["seed"]["domain"];
        p.xmin = d[0][0].get<double>();
        p.xmax = d[0][1].get<double>();
        p.ymin = d[1][0].get<double>();
        p.ymax = d[1][1].get<double>();
    }
    if (j.contains("resolution")) {
        p.nx = j["resolution"][0].get<int>();
        p.ny = j["resolution"][1].get<int>();
    }
    return p;
}

}  // namespace detail

// Pipeline state passed between job steps.
struct JobContext {
    ChristoffelPair seed;
    ChristoffelPair current;
    std::optional<DarbouxResult> last_darboux;
    ChristoffelPair before_last_transform;
    std::optional<double> last_t_parameter;
};

inline double check_residual(const JobContext& ctx, const json& c, json* detail_out) {
    std::string name = c["check"].get<std::string>();
    if (name == "isothermic_residual") {
        auto r = isothermic_residual(ctx.current.f, ctx.current.fc);
        return r.max;
    }
    if (name == "envelope_residual") {
        if (!ctx.last_darboux) fail(errc::spec_invalid, "envelope_residual needs a darboux step");
        GridOneForm df = ctx.before_last_transform.forms_f();
        auto r = envelope_residual(ctx.before_last_transform.f, ctx.last_darboux->fhat, &df,
                                   ctx.last_darboux->dfhat ? &*ctx.last_darboux->dfhat : nullptr);
        return r.max;
    }
    if (name == "h_surface_invariant") {
        if (!ctx.last_darboux) fail(errc::spec_invalid, "h_surface_invariant needs a darboux step");
        double H = c.value("H", 1.0);
        const ChristoffelPair& base = ctx.before_last_transform;
        if (base.f.dim != 3)
            fail(errc::spec_invalid, "h_surface_invariant check supports ambient dimension 3");
        // unit normal with the sign fixed by the duality fc = H f + N + const
        SurfaceGrid normal = base.f;
        GridOneForm df = base.forms_f();
        double plus = 0, minus = 0;
        for (int j = 0; j < base.f.ny; ++j)
            for (int i = 0; i < base.f.nx; ++i) {
                auto fx = df.ax.at(i, j);
                auto fy = df.ay.at(i, j);
                auto n = normal.at(i, j);
                n[0] = fx[1] * fy[2] - fx[2] * fy[1];
                n[1] = fx[2] * fy[0] - fx[0] * fy[2];
                n[2] = fx[0] * fy[1] - fx[1] * fy[0];
                double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                if (len < 1e-12) fail(errc::not_unit_normal, "degenerate normal");
                for (int k = 0; k < 3; ++k) n[k] /= len;
                auto f = base.f.at(i, j);
                auto fc = base.fc.at(i, j);
                for (int k = 0; k < 3; ++k) {
                    double body = fc[k] - H * f[k];
                    plus += (body - n[k]) * (body - n[k]);
                    minus += (body + n[k]) * (body + n[k]);
                }
            }
        // the residuals against +-N differ by a constant; pick the flatter fit
        if (minus < plus)
            for (auto& val : normal.vals) val = -val;
        auto drift = h_surface_invariant(base, *ctx.last_darboux, normal, H);
        if (detail_out) (*detail_out)["parallel_residual"] = drift.parallel_residual;
        return drift.drift.max;
    }
    if (name == "calapso_residual") {
        auto data = conformal_frame(ctx.current.f);
        auto r = calapso_residual(data);
        if (detail_out) {
            (*detail_out)["r1"] = r.r1;
            (*detail_out)["r2"] = r.r2;
        }
        return std::max(r.r1, r.r2);
    }
    if (name == "t_plane_closed_form") {
        if (!ctx.last_t_parameter) fail(errc::spec_invalid, "check needs a t_transform step");
        double r = *ctx.last_t_parameter;
        if (r <= 0) fail(errc::spec_invalid, "closed form check needs r > 0");
        double sr = std::sqrt(r);
        const SurfaceGrid& f = ctx.current.f;
        double worst = 0;
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                if (!f.valid(i, j)) continue;
                double x = f.x(i), y = f.y(j);
                double den = 2 * (std::cos(sr * x) * std::cos(sr * x) +
                                  std::sinh(sr * y) * std::sinh(sr * y));
                auto v = f.at(i, j);
                worst = std::max(worst, std::abs(v[0] - std::sin(2 * sr * x) / den));
                worst = std::max(worst, std::abs(v[1] - std::sinh(2 * sr * y) / den));
            }
        return worst;
    }
    if (name == "darboux_involution") {
        if (!ctx.last_darboux) fail(errc::spec_invalid, "involution check needs a darboux step");
        const ChristoffelPair& base = ctx.before_last_transform;
        auto fo = base.f.at(base.f.i0, base.f.j0);
        std::vector<double> back(fo.begin(), fo.end());
        auto second = darboux(ctx.last_darboux->pair(), ctx.last_darboux->r, back);
        double worst = 0;
        for (int j = 0; j < base.f.ny; ++j)
            for (int i = 0; i < base.f.nx; ++i) {
                if (!second.fhat.valid(i, j)) continue;
                for (int k = 0; k < base.f.dim; ++k)
                    worst = std::max(worst,
                                     std::abs(second.fhat.at(i, j)[k] - base.f.at(i, j)[k]));
            }
        return worst;
    }
    fail(errc::spec_invalid, "unknown verification '" + name + "'");
}

inline JobReport run_job(const JobSpec& spec, const std::filesystem::path& outdir,
                         bool verbose = false) {
    const json& j = spec.raw;
    JobContext ctx;
    SeedParams params = detail::seed_params_from(j);
    std::string kind = j["seed"]["kind"].get<std::string>();
    SeedKind sk = kind == "plane"      ? SeedKind::plane
                  : kind == "cylinder" ? SeedKind::cylinder
                                       : SeedKind::revolution;
    ctx.seed = seed_surface(sk, params);
    ctx.current = ctx.seed;
    ctx.before_last_transform = ctx.seed;

    JobReport out;
    out.report["seed"] = kind;
    json steps = json::array();

    if (j.contains("transforms"))
        for (const auto& t : j["transforms"]) {
            std::string op = t["op"].get<std::string>();
            json step;
            step["op"] = op;
            ctx.before_last_transform = ctx.current;
            if (op == "darboux") {
                double r = t.value("r", 1.0);
                std::vector<double> v = t.at("v").get<std::vector<double>>();
                auto res = darboux(ctx.current, r, v);
                step["masked_fraction"] = res.masked_fraction();
                ctx.last_darboux = res;
                ctx.current = res.pair();
            } else if (op == "t_transform") {
                double r = t.value("r", 1.0);
                auto res = t_transform(ctx.current, r);
                ctx.last_t_parameter = r;
                ctx.last_darboux.reset();
                ctx.current = res.pair;
            } else if (op == "dress_pair_direct") {
                auto a = t.at("alpha");
                cplx alpha(a[0].get<double>(), a[1].get<double>());
                std::vector<double> v = t.at("v").get<std::vector<double>>();
                auto fo = ctx.current.f.at(ctx.current.f.i0, ctx.current.f.j0);
                std::vector<double> fov(fo.begin(), fo.end());
                auto p = make_simple_factor(alpha, v, fov);
                auto res = dress_pair_direct(p, ctx.current);
                step["omega_null_drift"] = res.omega_null_drift;
                ctx.last_darboux.reset();
                ctx.current = res.pair;
            } else if (op == "christoffel") {
                double q = t.value("q", ctx.current.q);
                auto res = christoffel_transform(ctx.current.f, q);
                step["closedness"] = res.closedness;
                ctx.last_darboux.reset();
                ctx.current = res.pair;
            }
            steps.push_back(step);
            if (verbose) std::fprintf(stderr, "step %s done\n", op.c_str());
        }
    out.report["steps"] = steps;

    json checks = json::array();
    if (j.contains("verify"))
        for (const auto& c : j["verify"]) {
            json entry;
            entry["check"] = c["check"];
            json detail;
            double residual = check_residual(ctx, c, &detail);
            double tol = c.value("tol", 1e-6);
            entry["max_residual"] = residual;
            entry["masked_fraction"] = ctx.current.f.masked_fraction();
            entry["tol"] = tol;
            bool pass = residual <= tol;
            entry["pass"] = pass;
            if (!detail.empty()) entry["detail"] = detail;
            out.pass = out.pass && pass;
            checks.push_back(entry);
            if (verbose)
                std::fprintf(stderr, "check %s: %.3g %s\n",
                             c["check"].get<std::string>().c_str(), residual,
                             pass ? "pass" : "FAIL");
        }
    out.report["checks"] = checks;
    out.report["pass"] = out.pass;

    if (j.contains("outputs")) {
        std::filesystem::create_directories(outdir);
        json artifacts = json::array();
        for (const auto& o : j["outputs"]) {
            std::string what = o.value("what", "surface");
            const SurfaceGrid& g = what == "dual" ? ctx.current.fc : ctx.current.f;
            std::string fname = o.at("path").get<std::string>();
            std::filesystem::path path = outdir / fname;
            std::string fmt = o.value("format", "json");
            if (fmt == "obj" || fmt == "ply") {
                std::array<int, 3> axes{0, 1, std::min(2, g.dim - 1)};
                if (o.contains("axes"))
                    for (int k = 0; k < 3; ++k) axes[k] = o["axes"][k].get<int>();
                export_mesh(g, path, fmt, axes);
            } else {
                save_grid(g, path);
            }
            artifacts.push_back(path.string());
        }
        out.report["artifacts"] = artifacts;
    }
    return out;
}

}  // namespace isothermic
