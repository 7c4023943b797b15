#pragma once

#include "isothermic/surface.hpp"
#include "isothermic/vahlen.hpp"

namespace isothermic {

// Frame field F: M -> SL(Gamma_{n+1,1}), one Vahlen matrix per node, based at
// the grid's base node.
template <class S>
struct FrameField {
    int nx = 0, ny = 0;
    int i0 = 0, j0 = 0;
    Signature sig;
    std::vector<VahlenMatrix<S>> m;
    std::vector<std::uint8_t> mask;

    FrameField() = default;
    FrameField(const SurfaceGrid& g, Signature s)
        : nx(g.nx), ny(g.ny), i0(g.i0), j0(g.j0), sig(s),
          m(std::size_t(g.nx) * g.ny, VahlenMatrix<S>::identity(s)),
          mask(std::size_t(g.nx) * g.ny, 1) {}

    std::size_t node(int i, int j) const { return std::size_t(j) * nx + i; }
    VahlenMatrix<S>& at(int i, int j) { return m[node(i, j)]; }
    const VahlenMatrix<S>& at(int i, int j) const { return m[node(i, j)]; }
};

struct DarbouxResult {
    SurfaceGrid fhat;
    SurfaceGrid fhat_c;
    SurfaceGrid g;
    double r = 0;
    std::vector<double> v;
    double q = 0;
    std::optional<GridOneForm> dfhat;
    std::optional<GridOneForm> dfhat_c;
    std::shared_ptr<const OneFormSource> dfhat_src;
    std::shared_ptr<const OneFormSource> dfhat_c_src;

    ChristoffelPair pair() const {
        ChristoffelPair p{fhat, fhat_c, q};
        p.df = dfhat;
        p.dfc = dfhat_c;
        p.df_src = dfhat_src;
        p.dfc_src = dfhat_c_src;
        return p;
    }
    double masked_fraction() const { return fhat.masked_fraction(); }
};

struct DarbouxOptions {
    int rk_substeps = 2;
    int refine = 3;  // internal integration lattice refinement
    double mask_lo = 1e-8;
    double mask_hi = 1e8;
    // pole-crossing guards: a substep update this large relative to the
    // current state, or a state this big, marks the node and everything
    // downstream on the tree as untrusted
    double jump_frac = 0.5;
    double corrupt_norm = 1e6;
};

// Darboux transform D_r^v: integrates the Riccati equation
// dg = r g dfc g - df by classical RK4 along the spanning tree of an
// internally refined lattice, with the coordinate 1-forms evaluated through
// the pair's form sources; g(o) = v - f(o).  Blow-up nodes are masked, never
// extrapolated.
inline DarbouxResult darboux(const ChristoffelPair& pair, double r, std::span<const double> v,
                             const DarbouxOptions& opt = {}) {
    const SurfaceGrid& f = pair.f;
    const SurfaceGrid& fc = pair.fc;
    if (r == 0.0) fail(errc::invalid_params, "darboux needs r != 0");
    if (static_cast<int>(v.size()) != f.dim) fail(errc::invalid_params, "seed dimension mismatch");
    Signature sig = f.ambient_sig();

    Mv g0(sig);
    {
        auto fo = f.at(f.i0, f.j0);
        for (int k = 0; k < f.dim; ++k) g0[1u << k] = v[k] - fo[k];
    }
    if (g0.max_abs() < 1e-12) fail(errc::seed_singular, "v coincides with f at the base point");

    auto src_f = pair.source_f();
    auto src_fc = pair.source_fc();

    const int R = std::max(1, opt.refine);
    SurfaceGrid gref((f.nx - 1) * R + 1, (f.ny - 1) * R + 1, f.hx / R, f.hy / R, f.x0, f.y0,
                     f.dim);
    gref.i0 = f.i0 * R;
    gref.j0 = f.j0 * R;
    std::vector<Mv> gmv(gref.mask.size(), Mv(sig));
    std::vector<std::uint8_t> intact(gref.mask.size(), 0);
    gmv[gref.node(gref.i0, gref.j0)] = g0;
    gref.set_value_mv(gref.i0, gref.j0, g0);
    intact[gref.node(gref.i0, gref.j0)] = 1;

    auto ok_range = [&](const Mv& g) {
        double n = g.frob_norm();
        return std::isfinite(n) && n > opt.mask_lo && n < opt.mask_hi;
    };
    if (!ok_range(g0)) fail(errc::seed_singular, "initial g outside admissible range");

    const int dim = f.dim;
    auto vec_rhs = [&](double x, double y, bool along_x, const double* g, double* out,
                       double scale) {
        // dg = r g dfc g - df with g b g = (g,g) b - 2 (g,b) g on vectors
        double a[16], c[16];
        std::span<double> as(a, std::size_t(dim)), cs(c, std::size_t(dim));
        src_f->eval(x, y, along_x, as);
        src_fc->eval(x, y, along_x, cs);
        double gg = 0, gc = 0;
        for (int k = 0; k < dim; ++k) {
            gg += g[k] * g[k];
            gc += g[k] * c[k];
        }
        for (int k = 0; k < dim; ++k) out[k] = scale * (r * (gg * c[k] - 2 * gc * g[k]) - a[k]);
    };

    walk_spanning_tree(gref, [&](int ip, int jp, int i, int j) {
        bool along_x = (jp == j);
        double h = along_x ? gref.hx : gref.hy;
        double sgn = along_x ? double(i - ip) : double(j - jp);
        double xa = gref.x(ip), ya = gref.y(jp);

        auto stage_xy = [&](double u, double* x, double* y) {
            *x = along_x ? xa + sgn * u * h : xa;
            *y = along_x ? ya : ya + sgn * u * h;
        };

        double g[16], k1[16], k2[16], k3[16], k4[16], tmp[16];
        auto gprev = gref.at(ip, jp);
        for (int k = 0; k < dim; ++k) g[k] = gprev[k];
        auto norm_of = [&](const double* p) {
            double n = 0;
            for (int k = 0; k < dim; ++k) n += p[k] * p[k];
            return std::sqrt(n);
        };

        bool alive = intact[gref.node(ip, jp)] != 0;
        if (alive) {
            int ns = std::max(1, opt.rk_substeps);
            double du = 1.0 / ns;
            double sh = sgn * h;
            for (int step = 0; step < ns && alive; ++step) {
                double entry = norm_of(g);
                double u0 = step * du, x, y;
                stage_xy(u0, &x, &y);
                vec_rhs(x, y, along_x, g, k1, sh);
                stage_xy(u0 + 0.5 * du, &x, &y);
                for (int k = 0; k < dim; ++k) tmp[k] = g[k] + 0.5 * du * k1[k];
                vec_rhs(x, y, along_x, tmp, k2, sh);
                for (int k = 0; k < dim; ++k) tmp[k] = g[k] + 0.5 * du * k2[k];
                vec_rhs(x, y, along_x, tmp, k3, sh);
                stage_xy(u0 + du, &x, &y);
                for (int k = 0; k < dim; ++k) tmp[k] = g[k] + du * k3[k];
                vec_rhs(x, y, along_x, tmp, k4, sh);
                double dn = 0;
                for (int k = 0; k < dim; ++k) {
                    double d = du / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
                    g[k] += d;
                    dn += d * d;
                }
                double n = norm_of(g);
                if (!std::isfinite(n) || n > opt.corrupt_norm ||
                    std::sqrt(dn) > opt.jump_frac * (1.0 + entry))
                    alive = false;
            }
        }
        auto dst = gref.at(i, j);
        bool in_range = true;
        {
            double n = norm_of(g);
            in_range = std::isfinite(n) && n > opt.mask_lo && n < opt.mask_hi;
        }
        for (int k = 0; k < dim; ++k) dst[k] = g[k];
        intact[gref.node(i, j)] = alive ? 1 : 0;
        gref.set_mask(i, j, alive && in_range);
    });
    std::vector<Mv> dummy;
    (void)dummy;
    for (int j = 0; j < gref.ny; ++j)
        for (int i = 0; i < gref.nx; ++i) gmv[gref.node(i, j)] = gref.value_mv(sig, i, j);

    SurfaceGrid gg(f.nx, f.ny, f.hx, f.hy, f.x0, f.y0, f.dim);
    gg.i0 = f.i0;
    gg.j0 = f.j0;
    std::vector<Mv> gcoarse(gg.mask.size(), Mv(sig));
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            gcoarse[gg.node(i, j)] = gmv[gref.node(i * R, j * R)];
            gg.set_value_mv(i, j, gcoarse[gg.node(i, j)]);
            gg.set_mask(i, j, gref.valid(i * R, j * R));
        }
    if (gg.count_masked() == gg.mask.size()) fail(errc::all_singular, "no admissible nodes");

    DarbouxResult out;
    out.r = r;
    out.v.assign(v.begin(), v.end());
    out.q = pair.q;
    out.g = gg;
    out.fhat = f;
    out.fhat_c = fc;
    out.fhat.mask = gg.mask;
    out.fhat_c.mask = gg.mask;
    // the flow gives the output derivatives in closed form:
    // d fhat = r g dfc g and d fhat_c = r^{-1} g^{-1} df g^{-1}
    GridOneForm dff = pair.forms_f();
    GridOneForm dffc = pair.forms_fc();
    GridOneForm dfh = dff, dfhc = dff;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            const Mv& g = gcoarse[gg.node(i, j)];
            out.fhat.set_value_mv(i, j, f.value_mv(sig, i, j) + g);
            if (gg.valid(i, j)) {
                Mv ginv = g.conjugate() * (1.0 / clifford_norm(g));
                out.fhat_c.set_value_mv(i, j, fc.value_mv(sig, i, j) + ginv * (1.0 / r));
                dfh.ax.set_value_mv(i, j, (g * dffc.ax.value_mv(sig, i, j) * g) * r);
                dfh.ay.set_value_mv(i, j, (g * dffc.ay.value_mv(sig, i, j) * g) * r);
                dfhc.ax.set_value_mv(i, j, (ginv * dff.ax.value_mv(sig, i, j) * ginv) * (1.0 / r));
                dfhc.ay.set_value_mv(i, j, (ginv * dff.ay.value_mv(sig, i, j) * ginv) * (1.0 / r));
            } else {
                out.fhat_c.set_value_mv(i, j, fc.value_mv(sig, i, j));
            }
        }
    out.dfhat = dfh;
    out.dfhat_c = dfhc;
    SurfaceGrid gi_ref = gref;
    for (int j = 0; j < gref.ny; ++j)
        for (int i = 0; i < gref.nx; ++i) {
            const Mv& g = gmv[gref.node(i, j)];
            double n = inner(g, g);
            if (gref.valid(i, j) && std::abs(n) > 1e-300)
                gi_ref.set_value_mv(i, j, g.conjugate() * (1.0 / n));
        }
    out.dfhat_src = std::make_shared<ConjugatedFormSource>(src_fc, gref, r);
    out.dfhat_c_src = std::make_shared<ConjugatedFormSource>(src_f, gi_ref, 1.0 / r);
    return out;
}

namespace detail {

template <class S>
VahlenMatrix<S> offdiag(Signature sig, const Mv& top, const Mv& bot, S s_top, S s_bot) {
    VahlenMatrix<S> m(sig);
    if constexpr (scalar_traits<S>::is_complex) {
        m.b = complexify(top) * s_top;
        m.c = complexify(bot) * s_bot;
    } else {
        m.b = top * s_top;
        m.c = bot * s_bot;
    }
    return m;
}

}  // namespace detail

// Integrates dF = F B with B = (0, s_top df; s_bot dfc, 0), F(o) = identity:
// per edge the exact increment of the closed forms plus the h^2/12 commutator
// correction, then a renormalization keeping F on the group.
template <class S>
FrameField<S> integrate_pair_frame(const ChristoffelPair& pair, S s_top, S s_bot) {
    const SurfaceGrid& f = pair.f;
    const SurfaceGrid& fc = pair.fc;
    Signature sig = f.ambient_sig();
    GridOneForm dform = pair.forms_f();
    GridOneForm dcform = pair.forms_fc();
    const SurfaceGrid &fx = dform.ax, &fy = dform.ay;
    const SurfaceGrid &fcx = dcform.ax, &fcy = dcform.ay;

    FrameField<S> F(f, sig);
    walk_spanning_tree(f, [&](int ip, int jp, int i, int j) {
        bool along_x = (jp == j);
        double h = along_x ? f.hx : f.hy;
        const SurfaceGrid& ag = along_x ? fx : fy;
        const SurfaceGrid& cg = along_x ? fcx : fcy;

        Mv df = f.value_mv(sig, i, j) - f.value_mv(sig, ip, jp);
        Mv dfc = fc.value_mv(sig, i, j) - fc.value_mv(sig, ip, jp);
        VahlenMatrix<S> omega = detail::offdiag<S>(sig, df, dfc, s_top, s_bot);

        VahlenMatrix<S> b0 =
            detail::offdiag<S>(sig, ag.value_mv(sig, ip, jp), cg.value_mv(sig, ip, jp), s_top, s_bot);
        VahlenMatrix<S> b1 =
            detail::offdiag<S>(sig, ag.value_mv(sig, i, j), cg.value_mv(sig, i, j), s_top, s_bot);
        VahlenMatrix<S> comm = b0 * b1 - b1 * b0;
        omega = omega + comm * S(h * h / 12.0);

        VahlenMatrix<S> next = F.at(ip, jp) * vahlen_exp(omega);
        vahlen_renormalize(next);
        if (!std::isfinite(next.frob_norm()))
            fail(errc::integration_diverged, "frame integration produced non-finite values");
        F.at(i, j) = next;
        F.mask[F.node(i, j)] = F.mask[F.node(ip, jp)];
    });
    return F;
}

// Surface swept by a frame acting on 0 or on infinity; nodes mapped to the
// point at infinity are masked.
template <class S>
SurfaceGrid frame_surface(const FrameField<S>& F, const SurfaceGrid& like, bool at_infinity,
                          double* max_imag = nullptr) {
    SurfaceGrid out(like.nx, like.ny, like.hx, like.hy, like.x0, like.y0, like.dim);
    out.i0 = like.i0;
    out.j0 = like.j0;
    double worst_imag = 0;
    for (int j = 0; j < like.ny; ++j)
        for (int i = 0; i < like.nx; ++i) {
            ConformalPoint<S> p = at_infinity ? ConformalPoint<S>::infinity(F.sig)
                                              : ConformalPoint<S>::finite(Multivector<S>(F.sig));
            ConformalPoint<S> img = mobius_apply(F.at(i, j), p);
            if (img.infinite || F.mask[F.node(i, j)] == 0) {
                out.set_mask(i, j, false);
                continue;
            }
            auto coords = img.x.vector_coords();
            auto dst = out.at(i, j);
            for (int k = 0; k < like.dim; ++k) {
                dst[k] = scalar_traits<S>::real(coords[k]);
                worst_imag = std::max(worst_imag, std::abs(scalar_traits<S>::imag(coords[k])));
            }
        }
    if (max_imag) *max_imag = worst_imag;
    return out;
}

struct TTransformResult {
    ChristoffelPair pair;          // (T_r f, its dual for the same polarisation)
    FrameField<double> frame;
    SurfaceGrid darboux_partner;   // F_r . infinity = D_{-r} T_r f
};

// T-transform by integrating B_r = (0, df; r dfc, 0) from the identity at the
// base node.  Based frames make T_s T_r = T_{s+r} an exact identity.
inline TTransformResult t_transform(const ChristoffelPair& pair, double r,
                                    const Tolerances& tols = default_tols()) {
    TTransformResult out;
    out.frame = integrate_pair_frame<double>(pair, 1.0, r);
    out.pair.q = pair.q;
    out.pair.f = frame_surface(out.frame, pair.f, false);
    out.darboux_partner = frame_surface(out.frame, pair.f, true);
    if (r == 0.0) {
        // B_0 is strictly upper triangular: f_0 = f - f(o) exactly
        out.pair.fc = pair.fc;
        out.pair.df = pair.df;
        out.pair.dfc = pair.dfc;
        return out;
    }

    // d(F.0) = (a - b d^{-1} c) df d^{-1}, evaluated nodewise from the frame
    GridOneForm src = pair.forms_f();
    GridOneForm dfr = src;
    Signature sig = pair.f.ambient_sig();
    for (int j = 0; j < pair.f.ny; ++j)
        for (int i = 0; i < pair.f.nx; ++i) {
            if (!out.pair.f.valid(i, j)) continue;
            const Vahlen& m = out.frame.at(i, j);
            Mv dinv = invert(m.d);
            Mv lead = m.a - m.b * dinv * m.c;
            dfr.ax.set_value_mv(i, j, lead * src.ax.value_mv(sig, i, j) * dinv);
            dfr.ay.set_value_mv(i, j, lead * src.ay.value_mv(sig, i, j) * dinv);
        }
    ChristoffelResult dual = christoffel_transform(out.pair.f, pair.q, tols, &dfr);
    out.pair.fc = dual.pair.fc;
    out.pair.df = dual.pair.df;
    out.pair.dfc = dual.pair.dfc;
    intersect_mask(out.pair.f, dual.pair.f);
    return out;
}

struct BianchiFourth {
    SurfaceGrid fhat;
    double r1 = 0, r2 = 0;
};

// Algebraic fourth surface: fhat = (r2 f1 g1^{-1} - r1 f2 g2^{-1})
// (r2 g1^{-1} - r1 g2^{-1})^{-1}; nodes with degenerate denominators are
// masked.
inline BianchiFourth bianchi_fourth(const SurfaceGrid& f, const SurfaceGrid& f1,
                                    const SurfaceGrid& f2, double r1, double r2) {
    if (r1 == r2) fail(errc::equal_parameters, "bianchi_fourth needs r1 != r2");
    if (!f.congruent(f1) || !f.congruent(f2))
        fail(errc::invalid_params, "bianchi_fourth needs congruent grids");
    Signature sig = f.ambient_sig();
    BianchiFourth out{f, r1, r2};
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.valid(i, j) || !f1.valid(i, j) || !f2.valid(i, j)) {
                out.fhat.set_mask(i, j, false);
                continue;
            }
            Mv fv = f.value_mv(sig, i, j);
            Mv g1 = f1.value_mv(sig, i, j) - fv;
            Mv g2 = f2.value_mv(sig, i, j) - fv;
            double n1 = inner(g1, g1), n2 = inner(g2, g2);
            if (n1 < 1e-14 || n2 < 1e-14) {
                out.fhat.set_mask(i, j, false);
                continue;
            }
            Mv g1i = g1.conjugate() * (1.0 / n1);
            Mv g2i = g2.conjugate() * (1.0 / n2);
            Mv den = g1i * r2 - g2i * r1;
            Mv den_n = den * den.conjugate();
            if (!den_n.is_scalar(1e-9) || std::abs(den_n.scalar_part()) < 1e-12) {
                out.fhat.set_mask(i, j, false);
                continue;
            }
            Mv num = f1.value_mv(sig, i, j) * g1i * r2 - f2.value_mv(sig, i, j) * g2i * r1;
            Mv fh = num * (den.conjugate() * (1.0 / den_n.scalar_part()));
            double junk = fh.max_abs_off_grade(1);
            if (junk > 1e-7 * (1.0 + fh.max_abs())) {
                out.fhat.set_mask(i, j, false);
                continue;
            }
            out.fhat.set_value_mv(i, j, fh.grade_part(1));
        }
    return out;
}

struct BianchiCubeFace {
    std::array<int, 4> corners;  // indices into the surface list
    double prescribed = 0;
    double max_deviation = 0;
};

struct BianchiCube {
    // order: f, f1, f2, f3, f12, f13, f23, f123
    std::array<SurfaceGrid, 8> surfaces;
    std::array<BianchiCubeFace, 6> faces;
    double sphere_rank_defect = 0;  // 8 corners on one 2-sphere
};

inline double cross_ratio_deviation(const SurfaceGrid& a, const SurfaceGrid& b,
                                    const SurfaceGrid& c, const SurfaceGrid& d, double ratio) {
    Signature sig = a.ambient_sig();
    double worst = 0;
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i) {
            if (!a.valid(i, j) || !b.valid(i, j) || !c.valid(i, j) || !d.valid(i, j)) continue;
            auto [cr, is_real] =
                cross_ratio(a.value_mv(sig, i, j), b.value_mv(sig, i, j), c.value_mv(sig, i, j),
                            d.value_mv(sig, i, j), 1e-5);
            double dev = std::abs(cr.scalar_part() - ratio) + cr.max_abs_off_grade(0);
            worst = std::max(worst, dev);
        }
    return worst;
}

// Rank defect of the light-cone span of one grid node's eight cube corners:
// sigma_5 / sigma_1 of the embedding matrix, maxed over nodes.
inline double cube_sphere_defect(const std::array<SurfaceGrid, 8>& s) {
    const SurfaceGrid& f = s[0];
    double worst = 0;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            bool ok = true;
            for (const auto& g : s) ok = ok && g.valid(i, j);
            if (!ok) continue;
            linalg::MatD m(8, f.dim + 2);
            for (int k = 0; k < 8; ++k) {
                auto v = s[k].at(i, j);
                double xx = 0;
                for (int c = 0; c < f.dim; ++c) xx += v[c] * v[c];
                m(k, 0) = 1.0;
                for (int c = 0; c < f.dim; ++c) m(k, 1 + c) = v[c];
                m(k, f.dim + 1) = xx;
            }
            auto sv = linalg::singular_values(m);
            if (sv[0] > 0) worst = std::max(worst, sv[4] / sv[0]);
        }
    return worst;
}

// Cube of eight surfaces built from three Darboux transforms by iterated
// algebraic fourth points; every face is checked against its prescribed
// cross-ratio.
inline BianchiCube bianchi_cube(const ChristoffelPair& pair, double r1, double r2, double r3,
                                std::span<const double> v1, std::span<const double> v2,
                                std::span<const double> v3, const DarbouxOptions& opt = {}) {
    if (r1 == 0 || r2 == 0 || r3 == 0 || r1 == r2 || r1 == r3 || r2 == r3)
        fail(errc::equal_parameters, "cube needs distinct nonzero parameters");
    BianchiCube cube;
    cube.surfaces[0] = pair.f;
    cube.surfaces[1] = darboux(pair, r1, v1, opt).fhat;
    cube.surfaces[2] = darboux(pair, r2, v2, opt).fhat;
    cube.surfaces[3] = darboux(pair, r3, v3, opt).fhat;
    cube.surfaces[4] = bianchi_fourth(cube.surfaces[0], cube.surfaces[1], cube.surfaces[2], r1, r2).fhat;
    cube.surfaces[5] = bianchi_fourth(cube.surfaces[0], cube.surfaces[1], cube.surfaces[3], r1, r3).fhat;
    cube.surfaces[6] = bianchi_fourth(cube.surfaces[0], cube.surfaces[2], cube.surfaces[3], r2, r3).fhat;
    cube.surfaces[7] = bianchi_fourth(cube.surfaces[3], cube.surfaces[5], cube.surfaces[6], r1, r2).fhat;

    cube.faces[0] = {{0, 1, 4, 2}, r2 / r1, 0};
    cube.faces[1] = {{3, 5, 7, 6}, r2 / r1, 0};
    cube.faces[2] = {{0, 3, 5, 1}, r1 / r3, 0};
    cube.faces[3] = {{2, 6, 7, 4}, r1 / r3, 0};
    cube.faces[4] = {{0, 3, 6, 2}, r2 / r3, 0};
    cube.faces[5] = {{1, 5, 7, 4}, r2 / r3, 0};
    for (auto& face : cube.faces)
        face.max_deviation =
            cross_ratio_deviation(cube.surfaces[face.corners[0]], cube.surfaces[face.corners[1]],
                                  cube.surfaces[face.corners[2]], cube.surfaces[face.corners[3]],
                                  face.prescribed);
    cube.sphere_rank_defect = cube_sphere_defect(cube.surfaces);
    return cube;
}

struct HSurfaceDrift {
    ResidualField drift;          // |r H g^2 - r {g,N} - 1| per node
    double parallel_residual = 0;  // fhat_c = H fhat + Nhat check
};

// Conserved quantity of the Riccati flow on a generalised H-surface with
// fc = H f + N; vanishes identically when it vanishes at the base point.
inline HSurfaceDrift h_surface_invariant(const ChristoffelPair& pair, const DarbouxResult& res,
                                         const SurfaceGrid& normal, double H) {
    const SurfaceGrid& f = pair.f;
    if (!f.congruent(normal)) fail(errc::invalid_params, "normal grid mismatch");
    Signature sig = f.ambient_sig();
    SurfaceGrid fx = deriv_x(f), fy = deriv_y(f);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!f.valid(i, j)) continue;
            Mv n = normal.value_mv(sig, i, j);
            double len = inner(n, n);
            double tx = inner(n, fx.value_mv(sig, i, j));
            double ty = inner(n, fy.value_mv(sig, i, j));
            double scale = std::sqrt(inner(fx.value_mv(sig, i, j), fx.value_mv(sig, i, j)));
            if (std::abs(len - 1.0) > 1e-6 || std::abs(tx) + std::abs(ty) > 1e-4 * (1 + scale))
                fail(errc::not_unit_normal, "normal field fails unit/orthogonality checks");
        }

    HSurfaceDrift out;
    out.drift.nx = f.nx;
    out.drift.ny = f.ny;
    out.drift.per_node.assign(f.mask.size(), 0.0);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            if (!res.g.valid(i, j)) continue;
            Mv g = res.g.value_mv(sig, i, j);
            Mv n = normal.value_mv(sig, i, j);
            double I = -res.r * H * inner(g, g) + 2.0 * res.r * inner(g, n) - 1.0;
            out.drift.per_node[f.node(i, j)] = std::abs(I);
            out.drift.max = std::max(out.drift.max, std::abs(I));

            // parallel dual: fhat_c = H fhat + Nhat with Nhat = -g N g^{-1}
            Mv nhat = -(g * n * invert(g));
            Mv resid = res.fhat_c.value_mv(sig, i, j) - res.fhat.value_mv(sig, i, j) * H - nhat;
            out.parallel_residual = std::max(out.parallel_residual, resid.max_abs());
        }
    return out;
}

// lambda-sampled family of frame fields; sample set is closed under negation
// and conjugation and always contains 0, where every frame is the identity.
struct ExtendedFrameField {
    std::vector<cplx> lambdas;
    std::vector<FrameField<cplx>> frames;
    SurfaceGrid domain;  // geometry of the underlying grid

    int sample_index(cplx lambda, double tol = 1e-12) const {
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            if (std::abs(lambdas[k] - lambda) <= tol) return static_cast<int>(k);
        return -1;
    }
};

struct PFlatMap {
    SurfaceGrid f0;
    SurfaceGrid f0c;
    double max_imag = 0;
};

// Sym formula: central lambda-derivative of the frame family at 0; the
// off-diagonal blocks are the Christoffel pair generating the family.
inline PFlatMap sym_formula(const ExtendedFrameField& phi, double eps = 1e-3) {
    int ip = phi.sample_index(cplx(eps, 0)), im = phi.sample_index(cplx(-eps, 0));
    int ip2 = phi.sample_index(cplx(2 * eps, 0)), im2 = phi.sample_index(cplx(-2 * eps, 0));
    if (ip < 0 || im < 0 || ip2 < 0 || im2 < 0)
        fail(errc::insufficient_samples, "sym formula needs lambda in {+-eps, +-2eps}");
    const auto& fp = phi.frames[ip];
    const auto& fm = phi.frames[im];
    const auto& fp2 = phi.frames[ip2];
    const auto& fm2 = phi.frames[im2];

    PFlatMap out;
    out.f0 = SurfaceGrid(phi.domain.nx, phi.domain.ny, phi.domain.hx, phi.domain.hy, phi.domain.x0,
                         phi.domain.y0, phi.domain.dim);
    out.f0.i0 = phi.domain.i0;
    out.f0.j0 = phi.domain.j0;
    out.f0c = out.f0;
    Signature sig = fp.sig;
    for (int j = 0; j < out.f0.ny; ++j)
        for (int i = 0; i < out.f0.nx; ++i) {
            VahlenC d = (fp.at(i, j) - fm.at(i, j)) * cplx(8.0, 0) -
                        (fp2.at(i, j) - fm2.at(i, j));
            d = d * cplx(1.0 / (12.0 * eps), 0);
            auto top = d.b.vector_coords();
            auto bot = d.c.vector_coords();
            auto dst0 = out.f0.at(i, j);
            auto dst1 = out.f0c.at(i, j);
            for (int k = 0; k < out.f0.dim; ++k) {
                dst0[k] = top[k].real();
                dst1[k] = bot[k].real();
                out.max_imag = std::max({out.max_imag, std::abs(top[k].imag()),
                                         std::abs(bot[k].imag())});
            }
            bool ok = fp.mask[fp.node(i, j)] && fm.mask[fm.node(i, j)] &&
                      fp2.mask[fp2.node(i, j)] && fm2.mask[fm2.node(i, j)];
            out.f0.set_mask(i, j, ok);
            out.f0c.set_mask(i, j, ok);
            (void)sig;
        }
    return out;
}

}  // namespace isothermic
