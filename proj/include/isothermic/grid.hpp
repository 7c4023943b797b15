#pragma once

#include <functional>
#include <span>

#include "isothermic/multivector.hpp"

namespace isothermic {

// Rectangular sample of a map from CCL coordinates (x,y) into R^dim.
// Node (i,j) sits at (x0 + i*hx, y0 + j*hy); storage is row-major in j.
struct SurfaceGrid {
    int nx = 0, ny = 0;
    double hx = 0, hy = 0;
    double x0 = 0, y0 = 0;
    int dim = 0;
    int i0 = 0, j0 = 0;  // base node
    std::vector<double> vals;
    std::vector<std::uint8_t> mask;  // 1 = valid

    SurfaceGrid() = default;
    SurfaceGrid(int nx_, int ny_, double hx_, double hy_, double x0_, double y0_, int dim_)
        : nx(nx_), ny(ny_), hx(hx_), hy(hy_), x0(x0_), y0(y0_), dim(dim_),
          vals(std::size_t(nx_) * ny_ * dim_, 0.0), mask(std::size_t(nx_) * ny_, 1) {
        if (nx < 3 || ny < 3 || hx <= 0 || hy <= 0 || dim < 1)
            fail(errc::invalid_params, "grid needs nx, ny >= 3 and positive spacings");
        i0 = nx / 2;
        j0 = ny / 2;
    }

    std::size_t node(int i, int j) const { return std::size_t(j) * nx + i; }
    std::span<double> at(int i, int j) { return {vals.data() + node(i, j) * dim, std::size_t(dim)}; }
    std::span<const double> at(int i, int j) const {
        return {vals.data() + node(i, j) * dim, std::size_t(dim)};
    }
    double x(int i) const { return x0 + i * hx; }
    double y(int j) const { return y0 + j * hy; }
    bool valid(int i, int j) const { return mask[node(i, j)] != 0; }
    void set_mask(int i, int j, bool ok) { mask[node(i, j)] = ok ? 1 : 0; }
    std::size_t count_masked() const {
        std::size_t n = 0;
        for (auto m : mask) n += (m == 0);
        return n;
    }
    double masked_fraction() const { return double(count_masked()) / double(mask.size()); }

    bool congruent(const SurfaceGrid& o) const {
        return nx == o.nx && ny == o.ny && dim == o.dim && std::abs(hx - o.hx) < 1e-15 &&
               std::abs(hy - o.hy) < 1e-15;
    }

    Mv value_mv(Signature sig, int i, int j) const {
        auto v = at(i, j);
        Mv m(sig);
        for (int k = 0; k < dim; ++k) m[1u << k] = v[k];
        return m;
    }
    void set_value(int i, int j, std::span<const double> v) {
        auto dst = at(i, j);
        for (int k = 0; k < dim; ++k) dst[k] = v[k];
    }
    void set_value_mv(int i, int j, const Mv& m) {
        auto dst = at(i, j);
        for (int k = 0; k < dim; ++k) dst[k] = m[1u << k];
    }

    static SurfaceGrid sample(int nx, int ny, double hx, double hy, double x0, double y0, int dim,
                              const std::function<void(double, double, std::span<double>)>& f) {
        SurfaceGrid g(nx, ny, hx, hy, x0, y0, dim);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) f(g.x(i), g.y(j), g.at(i, j));
        return g;
    }

    Signature ambient_sig() const { return make_signature(dim, 0); }
};

inline void intersect_mask(SurfaceGrid& a, const SurfaceGrid& b) {
    for (std::size_t k = 0; k < a.mask.size(); ++k) a.mask[k] &= b.mask[k];
}

// alpha = ax dx + ay dy with R^dim (Clifford-vector) coefficients.
struct GridOneForm {
    SurfaceGrid ax, ay;

    bool congruent(const SurfaceGrid& g) const { return ax.congruent(g) && ay.congruent(g); }
};

namespace stencil {

// First derivative along a grid line.  Fourth-order five-point stencils,
// central inside and one-sided at the boundary rings; boundary values feed
// path integrals whose errors get divided by h downstream, so they need the
// extra order.  Short lines fall back to the three-point rules.
template <class Get>
void d1_line(int n, double h, const Get& get, std::vector<double>& out, int dim) {
    out.assign(std::size_t(n) * dim, 0.0);
    auto put = [&](int i, int k, double v) { out[std::size_t(i) * dim + k] = v; };
    for (int k = 0; k < dim; ++k) {
        if (n >= 6) {
            for (int i = 2; i <= n - 3; ++i)
                put(i, k,
                    (-get(i + 2, k) + 8 * get(i + 1, k) - 8 * get(i - 1, k) + get(i - 2, k)) /
                        (12 * h));
            put(0, k,
                (-25 * get(0, k) + 48 * get(1, k) - 36 * get(2, k) + 16 * get(3, k) -
                 3 * get(4, k)) /
                    (12 * h));
            put(1, k,
                (-3 * get(0, k) - 10 * get(1, k) + 18 * get(2, k) - 6 * get(3, k) + get(4, k)) /
                    (12 * h));
            put(n - 2, k,
                (3 * get(n - 1, k) + 10 * get(n - 2, k) - 18 * get(n - 3, k) + 6 * get(n - 4, k) -
                 get(n - 5, k)) /
                    (12 * h));
            put(n - 1, k,
                (25 * get(n - 1, k) - 48 * get(n - 2, k) + 36 * get(n - 3, k) -
                 16 * get(n - 4, k) + 3 * get(n - 5, k)) /
                    (12 * h));
        } else {
            for (int i = 1; i <= n - 2; ++i) put(i, k, (get(i + 1, k) - get(i - 1, k)) / (2 * h));
            put(0, k, (-3 * get(0, k) + 4 * get(1, k) - get(2, k)) / (2 * h));
            put(n - 1, k, (3 * get(n - 1, k) - 4 * get(n - 2, k) + get(n - 3, k)) / (2 * h));
        }
    }
}

// Lagrange interpolation of grid-line data at a fractional offset from node
// `edge_lo` (u in [0,1] along the edge); six-point window where available.
inline void line_interp(const SurfaceGrid& g, bool along_x, int fixed, int edge_lo, double u,
                        std::span<double> out) {
    int n = along_x ? g.nx : g.ny;
    int m = std::min(6, n);
    int start = std::clamp(edge_lo - 2, 0, n - m);
    double t = edge_lo + u;  // in node units
    for (int k = 0; k < g.dim; ++k) out[k] = 0;
    for (int a = 0; a < m; ++a) {
        double w = 1;
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            w *= (t - (start + b)) / double(a - b);
        }
        auto v = along_x ? g.at(start + a, fixed) : g.at(fixed, start + a);
        for (int k = 0; k < g.dim; ++k) out[k] += w * v[k];
    }
}

}  // namespace stencil

inline SurfaceGrid deriv_x(const SurfaceGrid& g) {
    SurfaceGrid out = g;
    std::vector<double> line;
    for (int j = 0; j < g.ny; ++j) {
        auto get = [&](int i, int k) { return g.at(i, j)[k]; };
        stencil::d1_line(g.nx, g.hx, get, line, g.dim);
        for (int i = 0; i < g.nx; ++i)
            out.set_value(i, j, {line.data() + std::size_t(i) * g.dim, std::size_t(g.dim)});
    }
    return out;
}

inline SurfaceGrid deriv_y(const SurfaceGrid& g) {
    SurfaceGrid out = g;
    std::vector<double> line;
    for (int i = 0; i < g.nx; ++i) {
        auto get = [&](int j, int k) { return g.at(i, j)[k]; };
        stencil::d1_line(g.ny, g.hy, get, line, g.dim);
        for (int j = 0; j < g.ny; ++j)
            out.set_value(i, j, {line.data() + std::size_t(j) * g.dim, std::size_t(g.dim)});
    }
    return out;
}

inline SurfaceGrid deriv_xx(const SurfaceGrid& g) { return deriv_x(deriv_x(g)); }
inline SurfaceGrid deriv_yy(const SurfaceGrid& g) { return deriv_y(deriv_y(g)); }

// Finite-difference immersion check: the two coordinate derivatives must stay
// linearly independent at every unmasked node.
inline void check_immersed(const SurfaceGrid& g, double tol = 1e-8) {
    SurfaceGrid gx = deriv_x(g), gy = deriv_y(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.valid(i, j)) continue;
            auto vx = gx.at(i, j), vy = gy.at(i, j);
            double xx = 0, yy = 0, xy = 0;
            for (int k = 0; k < g.dim; ++k) {
                xx += vx[k] * vx[k];
                yy += vy[k] * vy[k];
                xy += vx[k] * vy[k];
            }
            double gram = xx * yy - xy * xy;
            if (!(gram > tol * tol)) fail(errc::degenerate_grid, "Jacobian rank below 2 at a node");
        }
}

inline GridOneForm d_form(const SurfaceGrid& f) {
    check_immersed(f);
    return {deriv_x(f), deriv_y(f)};
}

// Exterior derivative of a 1-form into dx^dy coefficients, central stencils.
inline SurfaceGrid d_of_oneform(const GridOneForm& a) {
    SurfaceGrid day_dx = deriv_x(a.ay);
    SurfaceGrid dax_dy = deriv_y(a.ax);
    SurfaceGrid out = day_dx;
    for (std::size_t k = 0; k < out.vals.size(); ++k) out.vals[k] = day_dx.vals[k] - dax_dy.vals[k];
    return out;
}

// Clifford wedge: coefficient of dx^dy is ax*by - ay*bx with the geometric
// product on the vector values.  Not alternating.
inline std::vector<Mv> wedge(const GridOneForm& a, const GridOneForm& b) {
    if (!a.ax.congruent(b.ax)) fail(errc::invalid_params, "wedge needs congruent grids");
    Signature sig = a.ax.ambient_sig();
    const SurfaceGrid& g = a.ax;
    std::vector<Mv> out(std::size_t(g.nx) * g.ny, Mv(sig));
    parallel_for(g.ny, [&](std::size_t j) {
        for (int i = 0; i < g.nx; ++i) {
            Mv axv = a.ax.value_mv(sig, i, int(j));
            Mv ayv = a.ay.value_mv(sig, i, int(j));
            Mv bxv = b.ax.value_mv(sig, i, int(j));
            Mv byv = b.ay.value_mv(sig, i, int(j));
            out[g.node(i, int(j))] = axv * byv - ayv * bxv;
        }
    });
    return out;
}

// Walks the row-then-column spanning tree from the base node; visit(iprev,
// jprev, i, j) is called once per tree edge in a fixed deterministic order.
template <class Visit>
void walk_spanning_tree(const SurfaceGrid& g, const Visit& visit) {
    for (int i = g.i0 + 1; i < g.nx; ++i) visit(i - 1, g.j0, i, g.j0);
    for (int i = g.i0 - 1; i >= 0; --i) visit(i + 1, g.j0, i, g.j0);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = g.j0 + 1; j < g.ny; ++j) visit(i, j - 1, i, j);
        for (int j = g.j0 - 1; j >= 0; --j) visit(i, j + 1, i, j);
    }
}

// Path integral of a 1-form from the base node along the spanning tree;
// per-edge quadrature integrates the cubic through four neighboring samples
// (trapezoid on short lines).  Base value zero.
inline SurfaceGrid integrate_oneform(const GridOneForm& form) {
    const SurfaceGrid& gx = form.ax;
    SurfaceGrid out(gx.nx, gx.ny, gx.hx, gx.hy, gx.x0, gx.y0, gx.dim);
    out.i0 = gx.i0;
    out.j0 = gx.j0;
    static constexpr double w_mid[4] = {-1.0 / 24, 13.0 / 24, 13.0 / 24, -1.0 / 24};
    static constexpr double w_lo[4] = {9.0 / 24, 19.0 / 24, -5.0 / 24, 1.0 / 24};
    static constexpr double w_hi[4] = {1.0 / 24, -5.0 / 24, 19.0 / 24, 9.0 / 24};
    walk_spanning_tree(gx, [&](int ip, int jp, int i, int j) {
        bool along_x = (jp == j);
        const SurfaceGrid& comp = along_x ? form.ax : form.ay;
        double h = along_x ? gx.hx : gx.hy;
        double sgn = along_x ? double(i - ip) : double(j - jp);
        int n = along_x ? gx.nx : gx.ny;
        int lo = along_x ? std::min(i, ip) : std::min(j, jp);
        auto prev = out.at(ip, jp);
        auto dst = out.at(i, j);
        if (n >= 4) {
            int start = std::clamp(lo - 1, 0, n - 4);
            const double* w = (start == lo - 1) ? w_mid : (start == lo ? w_lo : w_hi);
            for (int k = 0; k < gx.dim; ++k) {
                double acc = 0;
                for (int a = 0; a < 4; ++a) {
                    auto v = along_x ? comp.at(start + a, j) : comp.at(i, start + a);
                    acc += w[a] * v[k];
                }
                dst[k] = prev[k] + sgn * h * acc;
            }
        } else {
            auto a0 = comp.at(ip, jp);
            auto a1 = comp.at(i, j);
            for (int k = 0; k < gx.dim; ++k) dst[k] = prev[k] + sgn * 0.5 * h * (a0[k] + a1[k]);
        }
    });
    return out;
}

// Per-cell loop residual of the same trapezoid rule: quantifies how far the
// form is from closed at the discretization scale.
inline double closedness_residual(const GridOneForm& form) {
    const SurfaceGrid& gx = form.ax;
    const SurfaceGrid& gy = form.ay;
    double worst = 0;
    for (int j = 0; j + 1 < gx.ny; ++j)
        for (int i = 0; i + 1 < gx.nx; ++i) {
            for (int k = 0; k < gx.dim; ++k) {
                double loop = 0.5 * gx.hx * (gx.at(i, j)[k] + gx.at(i + 1, j)[k]) +
                              0.5 * gx.hy * (gy.at(i + 1, j)[k] + gy.at(i + 1, j + 1)[k]) -
                              0.5 * gx.hx * (gx.at(i, j + 1)[k] + gx.at(i + 1, j + 1)[k]) -
                              0.5 * gx.hy * (gy.at(i, j)[k] + gy.at(i, j + 1)[k]);
                worst = std::max(worst, std::abs(loop) / (gx.hx * gx.hy));
            }
        }
    return worst;
}

struct ResidualField {
    std::vector<double> per_node;
    double max = 0;
    int nx = 0, ny = 0;
};

// Frobenius norm of wedge(df, dfc) per node; max over unmasked interior.
inline ResidualField isothermic_residual(const SurfaceGrid& f, const SurfaceGrid& fc) {
    if (!f.congruent(fc)) fail(errc::invalid_params, "residual needs congruent grids");
    GridOneForm df = d_form(f), dfc = d_form(fc);
    auto w = wedge(df, dfc);
    ResidualField r;
    r.nx = f.nx;
    r.ny = f.ny;
    r.per_node.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) r.per_node[k] = w[k].frob_norm();
    for (int j = 1; j + 1 < f.ny; ++j)
        for (int i = 1; i + 1 < f.nx; ++i)
            if (f.valid(i, j) && fc.valid(i, j)) r.max = std::max(r.max, r.per_node[f.node(i, j)]);
    return r;
}

}  // namespace isothermic
