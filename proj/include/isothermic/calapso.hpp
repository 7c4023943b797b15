#pragma once

#include "isothermic/surface.hpp"

namespace isothermic {

// Light-cone frame machinery in the basis (e0, e1..en, e_{n+1}) with
// (e0, e_{n+1}) = 1, (e_i, e_i) = 1 and e0, e_{n+1} null.  A point x of R^n
// lifts to e0 + x - (x,x)/2 e_{n+1}.
namespace lightcone {

inline int space_dim(int total) { return total - 2; }

inline double pair_dot(std::span<const double> a, std::span<const double> b) {
    int m = static_cast<int>(a.size());
    double s = a[0] * b[m - 1] + a[m - 1] * b[0];
    for (int k = 1; k + 1 < m; ++k) s += a[k] * b[k];
    return s;
}

inline void embed(std::span<const double> x, std::span<double> out) {
    int n = static_cast<int>(x.size());
    out[0] = 1;
    double xx = 0;
    for (int k = 0; k < n; ++k) {
        out[1 + k] = x[k];
        xx += x[k] * x[k];
    }
    out[n + 1] = -0.5 * xx;
}

inline bool project(std::span<const double> v, std::span<double> x, double tol = 1e-12) {
    int n = static_cast<int>(x.size());
    double c0 = v[0];
    double scale = 0;
    for (int k = 0; k < n + 2; ++k) scale = std::max(scale, std::abs(v[k]));
    if (std::abs(c0) <= tol * (1 + scale)) return false;
    for (int k = 0; k < n; ++k) x[k] = v[1 + k] / c0;
    return true;
}

inline linalg::MatD gram(int total) {
    linalg::MatD g(total, total);
    g(0, total - 1) = g(total - 1, 0) = 1;
    for (int k = 1; k + 1 < total; ++k) g(k, k) = 1;
    return g;
}

}  // namespace lightcone

// Invariant data of the unique (up to O(n-2)) CCL-adapted light-cone frame:
// the conformal Hopf components kappa, the potential psi, the closing
// function u and the connection 1-forms tau, chi1, chi2.
struct CalapsoData {
    SurfaceGrid kappa;  // dim = n-2
    SurfaceGrid psi;    // dim = 1
    SurfaceGrid u;      // dim = 1
    SurfaceGrid tau_x, tau_y;    // dim = n-2 each
    SurfaceGrid chi1, chi2;      // dim = 2: (chi_i1, chi_i2)
    double ccl_defect = 0;
    double chi_asymmetry = 0;    // measured |chi12 - chi21| before symmetrizing
    double frame_orth_drift = 0;
};

namespace detail {

struct LiftFrames {
    // per node, the vectors L, X, Y, N_1..N_{n-2}, fhat as rows
    int total = 0;
    std::vector<double> data;  // node-major, (n+2) vectors x (n+2) comps
    int nx = 0, ny = 0;

    std::span<double> vec(int i, int j, int which) {
        std::size_t node = std::size_t(j) * nx + i;
        return {data.data() + (node * (total)+0) * 0 + node * std::size_t(total) * total +
                    std::size_t(which) * total,
                std::size_t(total)};
    }
    std::span<const double> vec(int i, int j, int which) const {
        std::size_t node = std::size_t(j) * nx + i;
        return {data.data() + node * std::size_t(total) * total + std::size_t(which) * total,
                std::size_t(total)};
    }
};

}  // namespace detail

// Builds the CCL-adapted frame: isometric light-cone lift, parallel
// orthonormal frame of the conformal Gauss map transported along the spanning
// tree, dual null vector, and the invariant data read off from it.
inline CalapsoData conformal_frame(const SurfaceGrid& f,
                                   const Tolerances& tols = default_tols()) {
    int n = f.dim;
    if (n < 3) fail(errc::invalid_params, "conformal frame needs ambient dimension >= 3");
    int total = n + 2;
    int nnormals = n - 2;

    ConformalFactor cf = conformal_factor(f, tols.conformal_rel_tol);
    check_immersed(f);

    // CCL check: (f_xy)^perp must vanish
    SurfaceGrid fx = deriv_x(f), fy = deriv_y(f), fxy = deriv_y(fx);
    double ccl_defect = 0;
    for (int j = 2; j + 2 < f.ny; ++j)
        for (int i = 2; i + 2 < f.nx; ++i) {
            auto vx = fx.at(i, j), vy = fy.at(i, j), vxy = fxy.at(i, j);
            double e2u = cf.e2u[f.node(i, j)];
            double px = 0, py = 0;
            for (int k = 0; k < n; ++k) {
                px += vxy[k] * vx[k];
                py += vxy[k] * vy[k];
            }
            double perp2 = 0;
            for (int k = 0; k < n; ++k) {
                double p = vxy[k] - (px * vx[k] + py * vy[k]) / e2u;
                perp2 += p * p;
            }
            ccl_defect = std::max(ccl_defect, std::sqrt(perp2) / std::sqrt(e2u));
        }
    if (ccl_defect > 1e-2)
        fail(errc::not_ccl, "coordinates fail the curvature-line check: defect " +
                                std::to_string(ccl_defect));

    // isometric lift L = e^{-u} iota(f)
    SurfaceGrid lift(f.nx, f.ny, f.hx, f.hy, f.x0, f.y0, total);
    lift.i0 = f.i0;
    lift.j0 = f.j0;
    std::vector<double> emb(total);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            lightcone::embed(f.at(i, j), emb);
            double lam = 1.0 / std::sqrt(cf.e2u[f.node(i, j)]);
            auto dst = lift.at(i, j);
            for (int k = 0; k < total; ++k) dst[k] = lam * emb[k];
        }

    SurfaceGrid lx = deriv_x(lift), ly = deriv_y(lift);
    SurfaceGrid lxx = deriv_x(lx), lyy = deriv_y(ly);

    // parallel normal frame of the conformal Gauss map
    detail::LiftFrames frames;
    frames.total = total;
    frames.nx = f.nx;
    frames.ny = f.ny;
    frames.data.assign(std::size_t(f.nx) * f.ny * total * total, 0.0);

    auto build_node = [&](int i, int j, const double* seed_normals, double* drift,
                          bool greedy_seed = false) {
        // span to complement: U = {L, X, Y, Delta}
        std::vector<std::span<const double>> u_span{lift.at(i, j), lx.at(i, j), ly.at(i, j)};
        std::vector<double> delta(total);
        for (int k = 0; k < total; ++k) delta[k] = lxx.at(i, j)[k] + lyy.at(i, j)[k];
        u_span.push_back(delta);

        linalg::MatD gram_u(4, 4);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) gram_u(a, b) = lightcone::pair_dot(u_span[a], u_span[b]);
        linalg::MatD gram_inv = linalg::inverse(gram_u);

        auto project_out = [&](std::span<double> v) {
            double coef[4];
            for (int a = 0; a < 4; ++a) {
                double d = 0;
                for (int b = 0; b < 4; ++b) d += gram_inv(a, b) * lightcone::pair_dot(u_span[b], v);
                coef[a] = d;
            }
            for (int a = 0; a < 4; ++a)
                for (int k = 0; k < total; ++k) v[k] -= coef[a] * u_span[a][k];
        };

        for (int m = 0; m < nnormals; ++m) {
            auto dst = frames.vec(i, j, 3 + m);
            auto reduce = [&](std::span<double> vv) {
                project_out(vv);
                for (int mm = 0; mm < m; ++mm) {
                    auto prev = frames.vec(i, j, 3 + mm);
                    double d = lightcone::pair_dot(prev, vv);
                    for (int k = 0; k < total; ++k) vv[k] -= d * prev[k];
                }
            };
            if (greedy_seed) {
                // base node: take the coordinate direction that survives
                // projection best (the complement can mix the null slots)
                double best = -1;
                std::vector<double> pick(total, 0.0), trial(total);
                for (int cand = 0; cand < total; ++cand) {
                    std::fill(trial.begin(), trial.end(), 0.0);
                    trial[cand] = 1.0;
                    reduce(trial);
                    double nn = lightcone::pair_dot(trial, trial);
                    if (nn > best) {
                        best = nn;
                        pick = trial;
                    }
                }
                for (int k = 0; k < total; ++k) dst[k] = pick[k];
            } else {
                for (int k = 0; k < total; ++k) dst[k] = seed_normals[m * total + k];
                reduce(dst);
            }
            double nn = lightcone::pair_dot(dst, dst);
            if (nn < 1e-12)
                fail(errc::non_flat_normal_bundle,
                     "degenerate normal transport at node (" + std::to_string(i) + "," +
                         std::to_string(j) + "), norm " + std::to_string(nn));
            double inv = 1.0 / std::sqrt(nn);
            double dd = 0;
            for (int k = 0; k < total; ++k) {
                if (!greedy_seed) dd = std::max(dd, std::abs(dst[k] - seed_normals[m * total + k]));
                dst[k] *= inv;
            }
            if (drift) *drift = std::max(*drift, dd);
        }

        // store L, X, Y and the dual null vector
        auto l_dst = frames.vec(i, j, 0);
        auto x_dst = frames.vec(i, j, 1);
        auto y_dst = frames.vec(i, j, 2);
        for (int k = 0; k < total; ++k) {
            l_dst[k] = lift.at(i, j)[k];
            x_dst[k] = lx.at(i, j)[k];
            y_dst[k] = ly.at(i, j)[k];
        }
        // fhat: null, orthogonal to X, Y, N, with (L, fhat) = 1
        std::vector<double> w(total, 0.0);
        double best = 0;
        for (int cand = total - 1; cand >= 0; --cand) {
            std::vector<double> trial(total, 0.0);
            trial[cand] = 1.0;
            // remove X, Y, N components (unit spacelike)
            for (int which = 1; which < 3 + nnormals; ++which) {
                auto vv = frames.vec(i, j, which);
                double d = lightcone::pair_dot(vv, trial);
                for (int k = 0; k < total; ++k) trial[k] -= d * vv[k];
            }
            double beta = lightcone::pair_dot(trial, l_dst);
            if (std::abs(beta) > best) {
                best = std::abs(beta);
                w = trial;
            }
        }
        double beta = lightcone::pair_dot(w, l_dst);
        if (std::abs(beta) < 1e-10) fail(errc::non_flat_normal_bundle, "dual direction degenerate");
        double gamma = lightcone::pair_dot(w, w);
        auto h_dst = frames.vec(i, j, 3 + nnormals);
        double a_coef = -gamma / (2 * beta * beta);
        for (int k = 0; k < total; ++k) h_dst[k] = a_coef * l_dst[k] + w[k] / beta;
    };

    double drift = 0;
    build_node(f.i0, f.j0, nullptr, nullptr, true);

    walk_spanning_tree(f, [&](int ip, int jp, int i, int j) {
        std::vector<double> carried(std::size_t(nnormals) * total);
        for (int m = 0; m < nnormals; ++m) {
            auto src = frames.vec(ip, jp, 3 + m);
            for (int k = 0; k < total; ++k) carried[std::size_t(m) * total + k] = src[k];
        }
        build_node(i, j, carried.data(), &drift);
    });

    // read the invariants off the frame
    CalapsoData data;
    data.ccl_defect = ccl_defect;
    data.frame_orth_drift = drift;
    auto mk = [&](int dim) {
        SurfaceGrid g(f.nx, f.ny, f.hx, f.hy, f.x0, f.y0, dim);
        g.i0 = f.i0;
        g.j0 = f.j0;
        return g;
    };
    data.kappa = mk(std::max(1, nnormals));
    data.psi = mk(1);
    data.u = mk(1);
    data.tau_x = mk(std::max(1, nnormals));
    data.tau_y = mk(std::max(1, nnormals));
    data.chi1 = mk(2);
    data.chi2 = mk(2);

    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            for (int m = 0; m < nnormals; ++m)
                data.kappa.at(i, j)[m] =
                    lightcone::pair_dot(frames.vec(i, j, 3 + m), lxx.at(i, j));

    // chi and tau need derivatives of the frame fields
    SurfaceGrid xfield = mk(total), yfield = mk(total), hfield = mk(total);
    std::vector<SurfaceGrid> nfields;
    for (int m = 0; m < nnormals; ++m) nfields.push_back(mk(total));
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            for (int k = 0; k < total; ++k) {
                xfield.at(i, j)[k] = frames.vec(i, j, 1)[k];
                yfield.at(i, j)[k] = frames.vec(i, j, 2)[k];
                hfield.at(i, j)[k] = frames.vec(i, j, 3 + nnormals)[k];
            }
            for (int m = 0; m < nnormals; ++m)
                for (int k = 0; k < total; ++k) nfields[m].at(i, j)[k] = frames.vec(i, j, 3 + m)[k];
        }
    SurfaceGrid xdx = deriv_x(xfield), xdy = deriv_y(xfield);
    SurfaceGrid ydx = deriv_x(yfield), ydy = deriv_y(yfield);
    std::vector<SurfaceGrid> ndx, ndy;
    for (int m = 0; m < nnormals; ++m) {
        ndx.push_back(deriv_x(nfields[m]));
        ndy.push_back(deriv_y(nfields[m]));
    }

    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            auto fh = frames.vec(i, j, 3 + nnormals);
            double chi11 = lightcone::pair_dot(xdx.at(i, j), fh);
            double chi12 = lightcone::pair_dot(xdy.at(i, j), fh);
            double chi21 = lightcone::pair_dot(ydx.at(i, j), fh);
            double chi22 = lightcone::pair_dot(ydy.at(i, j), fh);
            double psi = 0.5 * (chi12 + chi21);
            data.chi_asymmetry = std::max(data.chi_asymmetry, std::abs(chi12 - chi21));
            double uval = chi11 - chi22;
            double kk = 0;
            for (int m = 0; m < nnormals; ++m)
                kk += data.kappa.at(i, j)[m] * data.kappa.at(i, j)[m];
            data.psi.at(i, j)[0] = psi;
            data.u.at(i, j)[0] = uval;
            // chi recomposed so chi11 + chi22 = -(kappa,kappa) holds exactly
            data.chi1.at(i, j)[0] = 0.5 * (uval - kk);
            data.chi1.at(i, j)[1] = psi;
            data.chi2.at(i, j)[0] = psi;
            data.chi2.at(i, j)[1] = 0.5 * (-uval - kk);
            for (int m = 0; m < nnormals; ++m) {
                data.tau_x.at(i, j)[m] = lightcone::pair_dot(ndx[m].at(i, j), fh);
                data.tau_y.at(i, j)[m] = lightcone::pair_dot(ndy[m].at(i, j), fh);
            }
        }
    return data;
}

struct CalapsoResidual {
    double r1 = 0;  // max |kappa_xy - psi kappa|
    double r2 = 0;  // max |lap psi + 2 (kappa,kappa)_xy|
};

inline CalapsoResidual calapso_residual(const SurfaceGrid& kappa, const SurfaceGrid& psi) {
    if (!kappa.congruent(kappa) || kappa.nx != psi.nx || kappa.ny != psi.ny)
        fail(errc::invalid_params, "calapso residual needs congruent grids");
    SurfaceGrid kxy = deriv_y(deriv_x(kappa));
    SurfaceGrid pxx = deriv_x(deriv_x(psi)), pyy = deriv_y(deriv_y(psi));
    SurfaceGrid kk(kappa.nx, kappa.ny, kappa.hx, kappa.hy, kappa.x0, kappa.y0, 1);
    for (int j = 0; j < kappa.ny; ++j)
        for (int i = 0; i < kappa.nx; ++i) {
            double s = 0;
            auto kv = kappa.at(i, j);
            for (int m = 0; m < kappa.dim; ++m) s += kv[m] * kv[m];
            kk.at(i, j)[0] = s;
        }
    SurfaceGrid kkxy = deriv_y(deriv_x(kk));
    CalapsoResidual out;
    // the extraction and the two derivative layers each spread the one-sided
    // boundary stencils inward; stay clear of that footprint
    int margin = std::min(8, std::min(kappa.nx, kappa.ny) / 4);
    for (int j = margin; j + margin < kappa.ny; ++j)
        for (int i = margin; i + margin < kappa.nx; ++i) {
            double e1 = 0;
            for (int m = 0; m < kappa.dim; ++m) {
                double d = kxy.at(i, j)[m] - psi.at(i, j)[0] * kappa.at(i, j)[m];
                e1 += d * d;
            }
            out.r1 = std::max(out.r1, std::sqrt(e1));
            double e2 = pxx.at(i, j)[0] + pyy.at(i, j)[0] + 2 * kkxy.at(i, j)[0];
            out.r2 = std::max(out.r2, std::abs(e2));
        }
    return out;
}

inline CalapsoResidual calapso_residual(const CalapsoData& data) {
    return calapso_residual(data.kappa, data.psi);
}

struct CalapsoFrameResult {
    SurfaceGrid surface;
    double consistency_residual = 0;  // mixed-partial defect of the u system
    double orth_drift = 0;
};

// Rebuilds an isothermic surface from Calapso data: integrates the closing
// function u (with the spectral offset r), assembles the Maurer-Cartan matrix
// of the adapted frame and integrates it in O(n+1,1) from the identity, then
// stereo-projects the first frame vector.
inline CalapsoFrameResult frame_from_calapso(const SurfaceGrid& kappa, const SurfaceGrid& psi,
                                             double r, double consistency_tol = 1e-2) {
    int nnormals = kappa.dim;
    int n = nnormals + 2;
    int total = n + 2;
    const SurfaceGrid& like = kappa;

    SurfaceGrid kk(like.nx, like.ny, like.hx, like.hy, like.x0, like.y0, 1);
    for (int j = 0; j < like.ny; ++j)
        for (int i = 0; i < like.nx; ++i) {
            double s = 0;
            for (int m = 0; m < nnormals; ++m) s += kappa.at(i, j)[m] * kappa.at(i, j)[m];
            kk.at(i, j)[0] = s;
        }
    SurfaceGrid px = deriv_x(psi), py = deriv_y(psi);
    SurfaceGrid kkx = deriv_x(kk), kky = deriv_y(kk);
    SurfaceGrid kx = deriv_x(kappa), ky = deriv_y(kappa);

    // u_x = -2 psi_y - 2 (k,k)_x ; u_y = 2 psi_x + 2 (k,k)_y
    GridOneForm du{kk, kk};
    for (int j = 0; j < like.ny; ++j)
        for (int i = 0; i < like.nx; ++i) {
            du.ax.at(i, j)[0] = -2 * py.at(i, j)[0] - 2 * kkx.at(i, j)[0];
            du.ay.at(i, j)[0] = 2 * px.at(i, j)[0] + 2 * kky.at(i, j)[0];
        }
    double consistency = closedness_residual(du);
    if (consistency > consistency_tol)
        fail(errc::inconsistent_data,
             "u system is not integrable: residual " + std::to_string(consistency));
    SurfaceGrid u = integrate_oneform(du);
    for (auto& val : u.vals) val += r;

    auto b_matrix = [&](int i, int j, bool along_x) {
        double kkv = kk.at(i, j)[0];
        double uval = u.at(i, j)[0];
        double psiv = psi.at(i, j)[0];
        double chi11 = 0.5 * (uval - kkv), chi22 = 0.5 * (-uval - kkv);
        linalg::MatD b(total, total);
        if (along_x) {
            b(1, 0) = 1;
            b(0, 1) = chi11;
            b(0, 2) = psiv;  // chi21
            for (int m = 0; m < nnormals; ++m) {
                b(3 + m, 1) = kappa.at(i, j)[m];
                b(0, 3 + m) = kx.at(i, j)[m];  // tau_i^x = kappa_{i,x}
                b(1, 3 + m) = -kappa.at(i, j)[m];
                b(3 + m, total - 1) = -kx.at(i, j)[m];
            }
            b(total - 1, 1) = -1;
            b(1, total - 1) = -chi11;
            b(2, total - 1) = -psiv;
        } else {
            b(2, 0) = 1;
            b(0, 1) = psiv;  // chi12
            b(0, 2) = chi22;
            for (int m = 0; m < nnormals; ++m) {
                b(3 + m, 2) = -kappa.at(i, j)[m];
                b(0, 3 + m) = -ky.at(i, j)[m];  // tau_i^y = -kappa_{i,y}
                b(2, 3 + m) = kappa.at(i, j)[m];
                b(3 + m, total - 1) = ky.at(i, j)[m];
            }
            b(total - 1, 2) = -1;
            b(1, total - 1) = -psiv;
            b(2, total - 1) = -chi22;
        }
        return b;
    };

    linalg::MatD gram = lightcone::gram(total);
    auto renorm = [&](linalg::MatD& F) {
        linalg::MatD m = gram * F.transposed() * gram * F;
        linalg::MatD corr = linalg::MatD::identity(total) * 1.5 - m * 0.5;
        F = F * corr;
    };

    std::vector<linalg::MatD> frames(std::size_t(like.nx) * like.ny);
    frames[like.node(like.i0, like.j0)] = linalg::MatD::identity(total);
    double orth_drift = 0;
    walk_spanning_tree(like, [&](int ip, int jp, int i, int j) {
        bool along_x = (jp == j);
        double h = along_x ? like.hx : like.hy;
        double sgn = along_x ? double(i - ip) : double(j - jp);
        linalg::MatD b0 = b_matrix(ip, jp, along_x);
        linalg::MatD b1 = b_matrix(i, j, along_x);
        linalg::MatD omega = (b0 + b1) * (0.5 * sgn * h);
        linalg::MatD comm = b0 * b1 - b1 * b0;
        omega = omega + comm * (h * h / 12.0);
        linalg::MatD next = frames[like.node(ip, jp)] * linalg::mat_exp(omega);
        renorm(next);
        frames[like.node(i, j)] = next;
        linalg::MatD defect = gram * next.transposed() * gram * next -
                              linalg::MatD::identity(total);
        orth_drift = std::max(orth_drift, defect.max_abs());
    });

    CalapsoFrameResult out;
    out.consistency_residual = consistency;
    out.orth_drift = orth_drift;
    out.surface = SurfaceGrid(like.nx, like.ny, like.hx, like.hy, like.x0, like.y0, n);
    out.surface.i0 = like.i0;
    out.surface.j0 = like.j0;
    std::vector<double> col(total), proj(n);
    for (int j = 0; j < like.ny; ++j)
        for (int i = 0; i < like.nx; ++i) {
            const linalg::MatD& F = frames[like.node(i, j)];
            for (int k = 0; k < total; ++k) col[k] = F(k, 0);
            if (!lightcone::project(col, proj)) {
                out.surface.set_mask(i, j, false);
                continue;
            }
            out.surface.set_value(i, j, proj);
        }
    return out;
}

}  // namespace isothermic
