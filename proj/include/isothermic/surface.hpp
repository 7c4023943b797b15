#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "isothermic/grid.hpp"
#include "isothermic/linalg.hpp"

namespace isothermic {

// Evaluates one component field of a 1-form anywhere along a grid edge
// (u in [0,1] from the low-index node).  Path integrators interrogate these
// at quadrature points; producers that know the data in closed form supply
// it exactly instead of through grid interpolation.
class OneFormSource {
public:
    virtual ~OneFormSource() = default;
    virtual void eval(double x, double y, bool along_x, std::span<double> out) const = 0;
};

class GridFormSource final : public OneFormSource {
public:
    explicit GridFormSource(GridOneForm form) : form_(std::move(form)) {}
    void eval(double x, double y, bool along_x, std::span<double> out) const override;

private:
    GridOneForm form_;
};

class AnalyticFormSource final : public OneFormSource {
public:
    using Fn = std::function<void(double x, double y, bool along_x, std::span<double>)>;
    explicit AnalyticFormSource(Fn fn) : fn_(std::move(fn)) {}
    void eval(double x, double y, bool along_x, std::span<double> out) const override {
        fn_(x, y, along_x, out);
    }

private:
    Fn fn_;
};

// alpha(t) = scale * G(t) * base(t) * G(t) with G interpolated from a smooth
// conjugating field (possibly sampled finer than the host grid); the Darboux
// structure produces forms of exactly this shape, and interpolating g beats
// interpolating its products.
class ConjugatedFormSource final : public OneFormSource {
public:
    ConjugatedFormSource(std::shared_ptr<const OneFormSource> base, SurfaceGrid g_field,
                         double scale)
        : base_(std::move(base)), g_(std::move(g_field)), scale_(scale) {}
    void eval(double x, double y, bool along_x, std::span<double> out) const override;

private:
    std::shared_ptr<const OneFormSource> base_;
    SurfaceGrid g_;
    double scale_;
};

// Interpolates a grid field at an arbitrary point on a coordinate line; the
// off-line coordinate must sit on a grid line.
inline void grid_point_interp(const SurfaceGrid& g, double x, double y, bool along_x,
                              std::span<double> out) {
    double fi = (x - g.x0) / g.hx;
    double fj = (y - g.y0) / g.hy;
    if (along_x) {
        int j = int(std::lround(fj));
        int lo = std::clamp(int(std::floor(fi)), 0, g.nx - 2);
        stencil::line_interp(g, true, std::clamp(j, 0, g.ny - 1), lo, fi - lo, out);
    } else {
        int i = int(std::lround(fi));
        int lo = std::clamp(int(std::floor(fj)), 0, g.ny - 2);
        stencil::line_interp(g, false, std::clamp(i, 0, g.nx - 1), lo, fj - lo, out);
    }
}

inline void GridFormSource::eval(double x, double y, bool along_x, std::span<double> out) const {
    grid_point_interp(along_x ? form_.ax : form_.ay, x, y, along_x, out);
}

inline void ConjugatedFormSource::eval(double x, double y, bool along_x,
                                       std::span<double> out) const {
    // g b g = (g,g) b - 2 (g,b) g on vectors
    double gbuf[16], bbuf[16];
    std::span<double> gs(gbuf, std::size_t(g_.dim)), bs(bbuf, std::size_t(g_.dim));
    grid_point_interp(g_, x, y, along_x, gs);
    base_->eval(x, y, along_x, bs);
    double gg = 0, gb = 0;
    for (int k = 0; k < g_.dim; ++k) {
        gg += gbuf[k] * gbuf[k];
        gb += gbuf[k] * bbuf[k];
    }
    for (int k = 0; k < g_.dim; ++k) out[k] = scale_ * (gg * bbuf[k] - 2 * gb * gbuf[k]);
}

// (f, f^c, q): dual isothermic surfaces with wedge(df, df^c) = 0 and
// polarisation (df, df^c)^{2,0} = q dz^2, normalized so the standard plane
// pair (x e1 + y e2, x e1 - y e2) has q = 1.
//
// Producers that know the coordinate derivatives exactly (seeds, transforms)
// attach them; consumers fall back to finite differences of the grids.
struct ChristoffelPair {
    SurfaceGrid f;
    SurfaceGrid fc;
    double q = 1.0;
    std::optional<GridOneForm> df;
    std::optional<GridOneForm> dfc;
    std::shared_ptr<const OneFormSource> df_src;
    std::shared_ptr<const OneFormSource> dfc_src;

    GridOneForm forms_f() const { return df ? *df : d_form(f); }
    GridOneForm forms_fc() const { return dfc ? *dfc : d_form(fc); }
    std::shared_ptr<const OneFormSource> source_f() const {
        return df_src ? df_src : std::make_shared<GridFormSource>(forms_f());
    }
    std::shared_ptr<const OneFormSource> source_fc() const {
        return dfc_src ? dfc_src : std::make_shared<GridFormSource>(forms_fc());
    }
};

struct ConformalFactor {
    std::vector<double> e2u;       // (f_x, f_x) per node
    double worst_defect = 0;       // conformality defect, relative
};

inline ConformalFactor conformal_factor(const SurfaceGrid& f,
                                        double rel_tol = default_tols().conformal_rel_tol,
                                        bool enforce = true,
                                        const GridOneForm* forms = nullptr) {
    SurfaceGrid fx = forms ? forms->ax : deriv_x(f);
    SurfaceGrid fy = forms ? forms->ay : deriv_y(f);
    ConformalFactor out;
    out.e2u.resize(f.mask.size());
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            auto vx = fx.at(i, j), vy = fy.at(i, j);
            double xx = 0, yy = 0, xy = 0;
            for (int k = 0; k < f.dim; ++k) {
                xx += vx[k] * vx[k];
                yy += vy[k] * vy[k];
                xy += vx[k] * vy[k];
            }
            out.e2u[f.node(i, j)] = 0.5 * (xx + yy);
            if (!f.valid(i, j)) continue;
            double scale = xx + yy;
            double defect = (std::abs(xx - yy) + 2 * std::abs(xy)) / (scale > 0 ? scale : 1.0);
            out.worst_defect = std::max(out.worst_defect, defect);
        }
    if (enforce && out.worst_defect > rel_tol)
        fail(errc::not_conformal, "conformality defect " + std::to_string(out.worst_defect));
    return out;
}

// Extracts q from (df, df^c): q = (T_xx - T_yy)/2 - i T_xy with
// T_ab = (f_a, fc_b) symmetrized; real for CCL-aligned pairs.
inline cplx polarisation_coefficient(const SurfaceGrid& f, const SurfaceGrid& fc, int i, int j,
                                     const GridOneForm& df, const GridOneForm& dfc) {
    (void)f;
    (void)fc;
    auto dot = [&](const SurfaceGrid& a, const SurfaceGrid& b) {
        double s = 0;
        auto va = a.at(i, j), vb = b.at(i, j);
        for (std::size_t k = 0; k < va.size(); ++k) s += va[k] * vb[k];
        return s;
    };
    double txx = dot(df.ax, dfc.ax);
    double tyy = dot(df.ay, dfc.ay);
    double txy = 0.5 * (dot(df.ax, dfc.ay) + dot(df.ay, dfc.ax));
    return cplx(0.5 * (txx - tyy), -txy);
}

struct PolarisationField {
    std::vector<cplx> q;
    cplx at_base;
};

inline PolarisationField polarisation_field(const SurfaceGrid& f, const SurfaceGrid& fc) {
    GridOneForm df = d_form(f), dfc = d_form(fc);
    PolarisationField out;
    out.q.resize(f.mask.size());
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            out.q[f.node(i, j)] = polarisation_coefficient(f, fc, i, j, df, dfc);
    out.at_base = out.q[f.node(f.i0, f.j0)];
    return out;
}

struct ChristoffelResult {
    ChristoffelPair pair;
    double closedness = 0;   // loop residual of eta
    double conformal_defect = 0;
};

// Dual surface from eta = q e^{-2u} (f_x dx - f_y dy), path-integrated from
// the base node with f^c(o) = 0.  Nodes with (df,df) below the umbilic
// tolerance are masked out.
inline ChristoffelResult christoffel_transform(const SurfaceGrid& f, double q,
                                               const Tolerances& tols = default_tols(),
                                               const GridOneForm* forms = nullptr) {
    if (q == 0.0) fail(errc::invalid_params, "q = 0 gives a constant (non-immersed) dual");
    ConformalFactor cf = conformal_factor(f, tols.conformal_rel_tol, true, forms);
    check_immersed(f);

    SurfaceGrid fx = forms ? forms->ax : deriv_x(f);
    SurfaceGrid fy = forms ? forms->ay : deriv_y(f);
    GridOneForm eta{fx, fy};
    SurfaceGrid umbilic_mask = f;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            double e2u = cf.e2u[f.node(i, j)];
            if (e2u < tols.umbilic_tol) {
                umbilic_mask.set_mask(i, j, false);
                continue;
            }
            double s = q / e2u;
            auto ex = eta.ax.at(i, j), ey = eta.ay.at(i, j);
            for (int k = 0; k < f.dim; ++k) {
                ex[k] *= s;
                ey[k] *= -s;
            }
        }
    if (umbilic_mask.count_masked() == umbilic_mask.mask.size())
        fail(errc::umbilic_zero, "metric degenerate on the whole grid");

    double closed = closedness_residual(eta);
    if (closed > tols.closedness_tol * (1.0 + std::abs(q)))
        fail(errc::not_closed, "eta fails closedness: residual " + std::to_string(closed));

    ChristoffelResult out;
    out.pair.f = f;
    out.pair.fc = integrate_oneform(eta);
    out.pair.q = q;
    out.pair.df = GridOneForm{fx, fy};
    out.pair.dfc = eta;  // the dual's derivative, by construction
    out.closedness = closed;
    out.conformal_defect = cf.worst_defect;
    intersect_mask(out.pair.f, umbilic_mask);
    intersect_mask(out.pair.fc, umbilic_mask);
    return out;
}

// Principal-angle defect between span(d fhat) and span(g . df . g^{-1}),
// g = fhat - f: zero exactly when the two surfaces envelope a common sphere
// congruence.
inline ResidualField envelope_residual(const SurfaceGrid& f, const SurfaceGrid& fhat,
                                       const GridOneForm* df_in = nullptr,
                                       const GridOneForm* dfh_in = nullptr) {
    if (!f.congruent(fhat)) fail(errc::invalid_params, "envelope residual needs congruent grids");
    Signature sig = f.ambient_sig();
    GridOneForm df = df_in ? *df_in : d_form(f);
    GridOneForm dfh = dfh_in ? *dfh_in : d_form(fhat);
    ResidualField r;
    r.nx = f.nx;
    r.ny = f.ny;
    r.per_node.assign(f.mask.size(), 0.0);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            Mv g = fhat.value_mv(sig, i, j) - f.value_mv(sig, i, j);
            if (g.max_abs() < 1e-12) fail(errc::invalid_params, "surfaces coincide at a node");
            Mv gi = invert(g);
            Mv u1 = g * df.ax.value_mv(sig, i, j) * gi;
            Mv u2 = g * df.ay.value_mv(sig, i, j) * gi;
            std::vector<std::vector<double>> span_a{u1.vector_coords(), u2.vector_coords()};
            std::vector<std::vector<double>> span_b{dfh.ax.value_mv(sig, i, j).vector_coords(),
                                                    dfh.ay.value_mv(sig, i, j).vector_coords()};
            r.per_node[f.node(i, j)] = linalg::principal_angle_defect(span_a, span_b);
        }
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            if (f.valid(i, j) && fhat.valid(i, j)) r.max = std::max(r.max, r.per_node[f.node(i, j)]);
    return r;
}

struct SeedParams {
    double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
    int nx = 101, ny = 101;
    int ambient_dim = 3;
};

// f = x e1 + y e2 with dual x e1 - y e2; q = 1.
inline ChristoffelPair seed_plane(const SeedParams& p) {
    if (p.nx < 3 || p.ny < 3 || p.xmax <= p.xmin || p.ymax <= p.ymin || p.ambient_dim < 2)
        fail(errc::invalid_params, "bad plane parameters");
    double hx = (p.xmax - p.xmin) / (p.nx - 1), hy = (p.ymax - p.ymin) / (p.ny - 1);
    auto f = SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim,
                                 [](double x, double y, std::span<double> v) {
                                     v[0] = x;
                                     v[1] = y;
                                 });
    auto fc = SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim,
                                  [](double x, double y, std::span<double> v) {
                                      v[0] = x;
                                      v[1] = -y;
                                  });
    auto comp = [&](auto fn) {
        return SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim, fn);
    };
    ChristoffelPair pair{f, fc, 1.0};
    pair.df = GridOneForm{comp([](double, double, std::span<double> v) { v[0] = 1; }),
                          comp([](double, double, std::span<double> v) { v[1] = 1; })};
    pair.dfc = GridOneForm{comp([](double, double, std::span<double> v) { v[0] = 1; }),
                           comp([](double, double, std::span<double> v) { v[1] = -1; })};
    pair.df_src = std::make_shared<AnalyticFormSource>(
        [](double, double, bool along_x, std::span<double> v) {
            std::fill(v.begin(), v.end(), 0.0);
            v[along_x ? 0 : 1] = 1;
        });
    pair.dfc_src = std::make_shared<AnalyticFormSource>(
        [](double, double, bool along_x, std::span<double> v) {
            std::fill(v.begin(), v.end(), 0.0);
            v[along_x ? 0 : 1] = along_x ? 1 : -1;
        });
    return pair;
}

// Right cylinder of radius 1/2 in CCL coordinates, with the dual
// -1/2 sin2x e1 - 1/2 (1 - cos2x) e2 + y e3; the pair has q = -1.
inline ChristoffelPair seed_cylinder(const SeedParams& p) {
    if (p.nx < 3 || p.ny < 3 || p.xmax <= p.xmin || p.ymax <= p.ymin || p.ambient_dim < 3)
        fail(errc::invalid_params, "bad cylinder parameters");
    double hx = (p.xmax - p.xmin) / (p.nx - 1), hy = (p.ymax - p.ymin) / (p.ny - 1);
    auto f = SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim,
                                 [](double x, double y, std::span<double> v) {
                                     v[0] = 0.5 * std::sin(2 * x);
                                     v[1] = 0.5 * (1 - std::cos(2 * x));
                                     v[2] = y;
                                 });
    auto fc = SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim,
                                  [](double x, double y, std::span<double> v) {
                                      v[0] = -0.5 * std::sin(2 * x);
                                      v[1] = -0.5 * (1 - std::cos(2 * x));
                                      v[2] = y;
                                  });
    auto comp = [&](auto fn) {
        return SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim, fn);
    };
    ChristoffelPair pair{f, fc, -1.0};
    pair.df = GridOneForm{comp([](double x, double, std::span<double> v) {
                              v[0] = std::cos(2 * x);
                              v[1] = std::sin(2 * x);
                          }),
                          comp([](double, double, std::span<double> v) { v[2] = 1; })};
    pair.dfc = GridOneForm{comp([](double x, double, std::span<double> v) {
                               v[0] = -std::cos(2 * x);
                               v[1] = -std::sin(2 * x);
                           }),
                           comp([](double, double, std::span<double> v) { v[2] = 1; })};
    pair.df_src = std::make_shared<AnalyticFormSource>(
        [](double x, double, bool along_x, std::span<double> v) {
            std::fill(v.begin(), v.end(), 0.0);
            if (along_x) {
                v[0] = std::cos(2 * x);
                v[1] = std::sin(2 * x);
            } else {
                v[2] = 1;
            }
        });
    pair.dfc_src = std::make_shared<AnalyticFormSource>(
        [](double x, double, bool along_x, std::span<double> v) {
            std::fill(v.begin(), v.end(), 0.0);
            if (along_x) {
                v[0] = -std::cos(2 * x);
                v[1] = -std::sin(2 * x);
            } else {
                v[2] = 1;
            }
        });
    return pair;
}

// Catenoid-style surface of revolution (conformal by construction); the dual
// is computed numerically.
inline ChristoffelPair seed_revolution(const SeedParams& p) {
    if (p.nx < 3 || p.ny < 3 || p.xmax <= p.xmin || p.ymax <= p.ymin || p.ambient_dim < 3)
        fail(errc::invalid_params, "bad revolution parameters");
    double hx = (p.xmax - p.xmin) / (p.nx - 1), hy = (p.ymax - p.ymin) / (p.ny - 1);
    auto f = SurfaceGrid::sample(p.nx, p.ny, hx, hy, p.xmin, p.ymin, p.ambient_dim,
                                 [](double x, double y, std::span<double> v) {
                                     v[0] = std::cosh(x) * std::cos(y);
                                     v[1] = std::cosh(x) * std::sin(y);
                                     v[2] = x;
                                 });
    ChristoffelResult res = christoffel_transform(f, 1.0);
    return res.pair;
}

enum class SeedKind { plane, cylinder, revolution };

inline ChristoffelPair seed_surface(SeedKind kind, const SeedParams& p) {
    switch (kind) {
        case SeedKind::plane: return seed_plane(p);
        case SeedKind::cylinder: return seed_cylinder(p);
        case SeedKind::revolution: return seed_revolution(p);
    }
    fail(errc::invalid_params, "unknown seed kind");
}

}  // namespace isothermic
