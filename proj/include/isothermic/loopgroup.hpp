#pragma once

#include "isothermic/calapso.hpp"
#include "isothermic/transform.hpp"

namespace isothermic {

// Conversions between the 2x2 Clifford picture of Minkowski vectors
// (x, l; m, -x) and coordinates in the basis (e0, e_1..e_n, e_{n+1}) used by
// the matrix representation: e0 = v0, e_{n+1} = -2 v_inf.
inline std::vector<cplx> vahlen_vector_coords(const VahlenC& v) {
    int n = v.sig().dim();
    std::vector<cplx> c(n + 2);
    c[0] = v.c.scalar_part();
    auto x = v.a.vector_coords();
    for (int k = 0; k < n; ++k) c[1 + k] = x[k];
    c[n + 1] = -0.5 * v.b.scalar_part();
    return c;
}

inline VahlenC coords_to_vahlen_vector(Signature sig, std::span<const cplx> c) {
    int n = sig.dim();
    MvC x(sig);
    for (int k = 0; k < n; ++k) x[1u << k] = c[1 + k];
    VahlenC v(sig);
    v.a = x;
    v.d = -x;
    v.b = MvC::scalar(sig, -2.0 * c[n + 1]);
    v.c = MvC::scalar(sig, c[0]);
    return v;
}

namespace lightcone {

inline cplx cgram_dot(std::span<const cplx> a, std::span<const cplx> b) {
    int m = static_cast<int>(a.size());
    cplx s = a[0] * b[m - 1] + a[m - 1] * b[0];
    for (int k = 1; k + 1 < m; ++k) s += a[k] * b[k];
    return s;
}

// rho: reflection fixing R^n and negating the null pair
inline std::vector<cplx> rho(std::span<const cplx> a) {
    std::vector<cplx> r(a.begin(), a.end());
    r[0] = -r[0];
    r[a.size() - 1] = -r[a.size() - 1];
    return r;
}

}  // namespace lightcone

// Rational loop p_{alpha,L}(lambda) = t pi_+ + pi_0 + t^{-1} pi_- with
// t = (alpha-lambda)/(alpha+lambda), built from an isotropic line L with
// rho L != L; simple poles at +-alpha.
struct SimpleFactor {
    cplx alpha;
    int n = 0;  // ambient dimension
    std::vector<cplx> ell;  // null generator of L, coords in (e0, e, e_{n+1})
    linalg::MatC pi_plus, pi_zero, pi_minus;
    std::vector<double> seed_v;  // construction record
    std::vector<double> f_o;

    int total() const { return n + 2; }
};

inline SimpleFactor make_simple_factor_from_line(cplx alpha, std::span<const cplx> ell, int n) {
    if (std::abs(alpha) < 1e-12 || std::abs(alpha.real() * alpha.imag()) > 1e-12 * std::norm(alpha))
        fail(errc::invalid_alpha, "alpha^2 must be real and nonzero");
    SimpleFactor p;
    p.alpha = alpha;
    p.n = n;
    p.ell.assign(ell.begin(), ell.end());
    int total = n + 2;

    auto rl = lightcone::rho(p.ell);
    cplx pairing = lightcone::cgram_dot(p.ell, rl);
    double scale = 0;
    for (auto& z : p.ell) scale = std::max(scale, std::abs(z));
    if (std::abs(pairing) < 1e-10 * scale * scale)
        fail(errc::degenerate_line, "rho L parallel to L");
    cplx iso = lightcone::cgram_dot(p.ell, p.ell);
    if (std::abs(iso) > 1e-9 * scale * scale) fail(errc::degenerate_line, "L is not isotropic");

    linalg::MatD gram = lightcone::gram(total);
    p.pi_plus = linalg::MatC(total, total);
    p.pi_minus = linalg::MatC(total, total);
    // pi_+ v = (v, rho ell)/(ell, rho ell) ell ; pi_- v = (v, ell)/(rho ell, ell) rho ell
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) {
            cplx wplus(0, 0), wminus(0, 0);
            for (int k = 0; k < total; ++k) {
                wplus += cplx(gram(j, k), 0) * rl[k];
                wminus += cplx(gram(j, k), 0) * p.ell[k];
            }
            p.pi_plus(i, j) = p.ell[i] * wplus / pairing;
            p.pi_minus(i, j) = rl[i] * wminus / pairing;
        }
    p.pi_zero = linalg::MatC::identity(total) - p.pi_plus - p.pi_minus;
    return p;
}

// L spans the complexified null line of alpha (v - f(o)).
inline SimpleFactor make_simple_factor(cplx alpha, std::span<const double> v,
                                       std::span<const double> f_o) {
    if (v.size() != f_o.size()) fail(errc::invalid_params, "seed dimension mismatch");
    int n = static_cast<int>(v.size());
    std::vector<cplx> w(n);
    double sep = 0;
    for (int k = 0; k < n; ++k) {
        w[k] = alpha * (v[k] - f_o[k]);
        sep = std::max(sep, std::abs(v[k] - f_o[k]));
    }
    if (sep < 1e-12) fail(errc::null_seed, "v coincides with f at the base point");
    std::vector<cplx> ell(n + 2);
    ell[0] = 1;
    cplx ww(0, 0);
    for (int k = 0; k < n; ++k) {
        ell[1 + k] = w[k];
        ww += w[k] * w[k];
    }
    ell[n + 1] = -0.5 * ww;
    SimpleFactor p = make_simple_factor_from_line(alpha, ell, n);
    p.seed_v.assign(v.begin(), v.end());
    p.f_o.assign(f_o.begin(), f_o.end());
    return p;
}

inline linalg::MatC evaluate_factor(const SimpleFactor& p, cplx lambda) {
    if (std::abs(lambda - p.alpha) < 1e-12 || std::abs(lambda + p.alpha) < 1e-12)
        fail(errc::pole_evaluation, "lambda at a pole of the simple factor");
    cplx t = (p.alpha - lambda) / (p.alpha + lambda);
    return p.pi_plus * t + p.pi_zero + p.pi_minus * (cplx(1, 0) / t);
}

// lambda sample set per the artifact defaults: Sym stencil, the poles' duals
// and their halves/doubles, trimmed to admissible values.
inline std::vector<cplx> default_lambda_samples(cplx alpha, double eps = 1e-3) {
    std::vector<cplx> out{cplx(0, 0)};
    auto push_pair = [&](cplx l) {
        for (const auto& x : out)
            if (std::abs(x - l) < 1e-15) return;
        out.push_back(l);
        out.push_back(-l);
    };
    push_pair(cplx(eps, 0));
    push_pair(cplx(2 * eps, 0));
    if (std::abs(alpha) > 1e-12) {
        push_pair(alpha);
        push_pair(alpha * 0.5);
        push_pair(alpha * 2.0);
    }
    return out;
}

inline void validate_lambda_samples(const std::vector<cplx>& lambdas) {
    bool has_zero = false;
    for (const auto& l : lambdas) {
        if (std::abs(l) < 1e-15) has_zero = true;
        bool has_neg = false, has_conj = false;
        for (const auto& m : lambdas) {
            if (std::abs(m + l) < 1e-15) has_neg = true;
            if (std::abs(m - std::conj(l)) < 1e-15) has_conj = true;
        }
        if (!has_neg || !has_conj)
            fail(errc::invalid_params, "lambda set must be closed under negation and conjugation");
    }
    if (!has_zero) fail(errc::invalid_params, "lambda set must contain 0");
}

// Extended flat frame: per lambda, the based frame with Maurer-Cartan form
// lambda (0, df; dfc, 0).
inline ExtendedFrameField extended_frame(const ChristoffelPair& pair,
                                         const std::vector<cplx>& lambdas) {
    validate_lambda_samples(lambdas);
    ExtendedFrameField phi;
    phi.lambdas = lambdas;
    phi.domain = pair.f;
    phi.frames.resize(lambdas.size());
    Signature sig = pair.f.ambient_sig();
    parallel_for(lambdas.size(), [&](std::size_t k) {
        if (std::abs(lambdas[k]) < 1e-15) {
            phi.frames[k] = FrameField<cplx>(pair.f, sig);
        } else {
            phi.frames[k] = integrate_pair_frame<cplx>(pair, lambdas[k], lambdas[k]);
        }
    });
    return phi;
}

struct FrameInvariantReport {
    double reality = 0;
    double twisting = 0;
    double base_defect = 0;
    double group_defect = 0;
};

inline FrameInvariantReport frame_invariants(const ExtendedFrameField& phi) {
    FrameInvariantReport rep;
    Signature sig = phi.frames.empty() ? Signature{} : phi.frames[0].sig;
    VahlenC sigma(sig);
    sigma.a = MvC::scalar(sig, cplx(1, 0));
    sigma.d = MvC::scalar(sig, cplx(-1, 0));
    for (std::size_t k = 0; k < phi.lambdas.size(); ++k) {
        int kneg = phi.sample_index(-phi.lambdas[k]);
        int kconj = phi.sample_index(std::conj(phi.lambdas[k]));
        const auto& fk = phi.frames[k];
        for (int j = 0; j < phi.domain.ny; ++j)
            for (int i = 0; i < phi.domain.nx; ++i) {
                if (fk.mask[fk.node(i, j)] == 0) continue;
                const VahlenC& m = fk.at(i, j);
                if (kneg >= 0) {
                    VahlenC tw = sigma * m * sigma;  // sigma^{-1} = sigma
                    rep.twisting =
                        std::max(rep.twisting, (phi.frames[kneg].at(i, j) - tw).max_abs());
                }
                if (kconj >= 0) {
                    VahlenC cj{conj_coeffs(m.a), conj_coeffs(m.b), conj_coeffs(m.c),
                               conj_coeffs(m.d)};
                    rep.reality =
                        std::max(rep.reality, (phi.frames[kconj].at(i, j) - cj).max_abs());
                }
                VahlenC nm = m * m.conjugate_cl() - VahlenC::identity(sig);
                rep.group_defect = std::max(rep.group_defect, nm.max_abs());
            }
        rep.base_defect = std::max(
            rep.base_defect,
            (fk.at(phi.domain.i0, phi.domain.j0) - VahlenC::identity(sig)).max_abs());
    }
    return rep;
}

// Largest residual of a degree-1 polynomial fit in lambda to the per-edge
// logarithmic Maurer-Cartan data, over the given collinear samples.
inline double mc_linearity_residual(const ExtendedFrameField& phi,
                                    const std::vector<cplx>& samples) {
    if (samples.size() < 3) fail(errc::insufficient_samples, "need >= 3 collinear samples");
    std::vector<int> idx;
    for (const auto& l : samples) {
        int k = phi.sample_index(l);
        if (k < 0) fail(errc::insufficient_samples, "sample missing from the frame family");
        idx.push_back(k);
    }
    const SurfaceGrid& dom = phi.domain;
    std::size_t ns = samples.size();

    // normal equations for per-coefficient linear fit in lambda
    double s0 = double(ns);
    cplx s1(0, 0), s2(0, 0);
    for (const auto& l : samples) {
        s1 += l;
        s2 += l * l;
    }

    std::vector<double> row_worst(dom.ny, 0.0);
    parallel_for(dom.ny, [&](std::size_t j) {
        double worst = 0;
        std::vector<VahlenC> logs(ns, VahlenC(phi.frames[0].sig));
        for (int i = 0; i < dom.nx; ++i) {
            for (int dir = 0; dir < 2; ++dir) {
                int i2 = dir == 0 ? i + 1 : i;
                int j2 = dir == 0 ? int(j) : int(j) + 1;
                if (i2 >= dom.nx || j2 >= dom.ny) continue;
                bool ok = true;
                for (std::size_t s = 0; s < ns; ++s) {
                    const auto& fr = phi.frames[idx[s]];
                    if (fr.mask[fr.node(i, int(j))] == 0 || fr.mask[fr.node(i2, j2)] == 0) {
                        ok = false;
                        break;
                    }
                    logs[s] = vahlen_log_near_identity(fr.at(i, int(j)).inverse_group() *
                                                       fr.at(i2, j2));
                }
                if (!ok) continue;
                // fit each coefficient of the 2x2 Clifford matrix
                auto fit_entry = [&](auto getter) {
                    cplx b0(0, 0), b1(0, 0);
                    for (std::size_t s = 0; s < ns; ++s) {
                        cplx y = getter(logs[s]);
                        b0 += y;
                        b1 += std::conj(samples[s]) * y;
                    }
                    cplx det = s0 * s2 - s1 * s1;  // samples real in practice
                    cplx c1 = (s0 * b1 - s1 * b0) / det;
                    cplx c0 = (b0 - c1 * s1) / s0;
                    double res = 0;
                    for (std::size_t s = 0; s < ns; ++s)
                        res = std::max(res, std::abs(getter(logs[s]) - c0 - c1 * samples[s]));
                    return res;
                };
                const auto& sig = phi.frames[0].sig;
                for (std::uint32_t blade = 0; blade < sig.blades(); ++blade) {
                    worst = std::max(worst, fit_entry([&](const VahlenC& m) { return m.a[blade]; }));
                    worst = std::max(worst, fit_entry([&](const VahlenC& m) { return m.b[blade]; }));
                    worst = std::max(worst, fit_entry([&](const VahlenC& m) { return m.c[blade]; }));
                    worst = std::max(worst, fit_entry([&](const VahlenC& m) { return m.d[blade]; }));
                }
            }
        }
        row_worst[j] = worst;
    });
    double out = 0;
    for (double w : row_worst) out = std::max(out, w);
    return out;
}

namespace detail {

// Spin lift of gamma_L(t): since xi = [omega, rho omega] / (2 {omega, rho
// omega}) squares to 1/4, the lift is c(t) + s(t) xi with c = (sqrt t +
// 1/sqrt t)/2, s = sqrt t - 1/sqrt t.  Branch flips cancel in the dressing
// sandwich.
struct FactorLift {
    VahlenC xi;
    bool ok = false;
};

inline FactorLift factor_lift(const VahlenC& omega, double tol = 1e-8) {
    FactorLift lift;
    Signature sig = omega.sig();
    VahlenC rho_omega{omega.a, -omega.b, -omega.c, omega.d};
    VahlenC anti = omega * rho_omega + rho_omega * omega;
    double scale = omega.max_abs();
    cplx c = 0.5 * (anti.a.scalar_part() + anti.d.scalar_part());
    double offdiag = std::max(anti.b.max_abs(), anti.c.max_abs());
    double nonscalar = std::max(anti.a.max_abs_off_grade(0), anti.d.max_abs_off_grade(0));
    if (std::max(offdiag, nonscalar) > 1e-8 * (1 + scale * scale) ||
        std::abs(c) < tol * scale * scale)
        return lift;  // line hits <v0> or <v_inf>: anticommutator degenerates
    VahlenC comm = omega * rho_omega - rho_omega * omega;
    lift.xi = comm * (cplx(0.5, 0) / c);
    lift.ok = true;
    return lift;
}

inline VahlenC lift_eval(const FactorLift& lift, Signature sig, cplx t_sqrt) {
    cplx c = 0.5 * (t_sqrt + cplx(1, 0) / t_sqrt);
    cplx s = t_sqrt - cplx(1, 0) / t_sqrt;
    VahlenC out = lift.xi * s;
    out.a += MvC::scalar(sig, c);
    out.d += MvC::scalar(sig, c);
    return out;
}

inline VahlenC lift_eval_inverse(const FactorLift& lift, Signature sig, cplx t_sqrt) {
    cplx c = 0.5 * (t_sqrt + cplx(1, 0) / t_sqrt);
    cplx s = t_sqrt - cplx(1, 0) / t_sqrt;
    VahlenC out = lift.xi * (-s);
    out.a += MvC::scalar(sig, c);
    out.d += MvC::scalar(sig, c);
    return out;
}

}  // namespace detail

struct DressResult {
    ExtendedFrameField phi;
    double out_of_chart_fraction = 0;
};

// Dressing action of a simple factor: per node, transport the null line by
// Phi(alpha)^{-1} and sandwich every sample between the two spin lifts.
// The output drops the +-alpha samples (poles of the factor).
inline DressResult dress(const SimpleFactor& p, const ExtendedFrameField& phi) {
    int ia = phi.sample_index(p.alpha);
    if (ia < 0) fail(errc::missing_alpha_sample, "frame family lacks the alpha sample");
    Signature sig = phi.frames[0].sig;
    VahlenC omega0 = coords_to_vahlen_vector(sig, p.ell);
    detail::FactorLift lift_left = detail::factor_lift(omega0);
    if (!lift_left.ok) fail(errc::degenerate_line, "factor line degenerate at the base");

    DressResult out;
    out.phi.domain = phi.domain;
    for (std::size_t k = 0; k < phi.lambdas.size(); ++k) {
        if (std::abs(phi.lambdas[k] - p.alpha) < 1e-12 ||
            std::abs(phi.lambdas[k] + p.alpha) < 1e-12)
            continue;
        out.phi.lambdas.push_back(phi.lambdas[k]);
        out.phi.frames.push_back(phi.frames[k]);
    }

    const SurfaceGrid& dom = phi.domain;
    const FrameField<cplx>& fa = phi.frames[ia];
    std::size_t bad = 0;

    // per-node transported line and its lift
    std::vector<detail::FactorLift> lifts(std::size_t(dom.nx) * dom.ny);
    std::vector<std::uint8_t> chart_ok(lifts.size(), 0);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            std::size_t node = fa.node(i, j);
            if (fa.mask[node] == 0) continue;
            VahlenC inv = fa.at(i, j).conjugate_cl();  // N = 1 group inverse
            VahlenC omega_hat = inv * omega0 * inv.transpose_cl();
            auto lift = detail::factor_lift(omega_hat);
            if (!lift.ok) {
                ++bad;
                continue;
            }
            lifts[node] = lift;
            chart_ok[node] = 1;
        }
    out.out_of_chart_fraction = double(bad) / double(lifts.size());

    for (std::size_t k = 0; k < out.phi.lambdas.size(); ++k) {
        cplx lambda = out.phi.lambdas[k];
        FrameField<cplx>& frame = out.phi.frames[k];
        if (std::abs(lambda) < 1e-15) {
            for (std::size_t node = 0; node < lifts.size(); ++node)
                frame.mask[node] &= chart_ok[node];
            continue;  // p(0) = 1 on both sides
        }
        cplx t = (p.alpha - lambda) / (p.alpha + lambda);
        cplx ts = std::sqrt(t);
        VahlenC left = detail::lift_eval(lift_left, sig, ts);
        for (int j = 0; j < dom.ny; ++j)
            for (int i = 0; i < dom.nx; ++i) {
                std::size_t node = frame.node(i, j);
                if (frame.mask[node] == 0 || chart_ok[node] == 0) {
                    frame.mask[node] = 0;
                    continue;
                }
                VahlenC right = detail::lift_eval_inverse(lifts[node], sig, ts);
                VahlenC dressed = left * frame.at(i, j) * right;
                vahlen_renormalize(dressed);
                frame.at(i, j) = dressed;
            }
    }
    return out;
}

struct DressPairResult {
    ChristoffelPair pair;
    SurfaceGrid g;
    double omega_null_drift = 0;
    double max_imag = 0;
};

// Direct route: integrate omega = Phi_alpha^{-1} omega_0 along the grid and
// read g = v/(t alpha) off its blocks; agrees with the Riccati transform at
// r = alpha^2.
inline DressPairResult dress_pair_direct(const SimpleFactor& p, const ChristoffelPair& pair) {
    Signature sig = pair.f.ambient_sig();
    if (static_cast<int>(p.ell.size()) != pair.f.dim + 2)
        fail(errc::invalid_params, "factor dimension mismatch");
    FrameField<cplx> fa = integrate_pair_frame<cplx>(pair, p.alpha, p.alpha);
    VahlenC omega0 = coords_to_vahlen_vector(sig, p.ell);
    double r = (p.alpha * p.alpha).real();

    DressPairResult out;
    out.pair.q = pair.q;
    out.pair.f = pair.f;
    out.pair.fc = pair.fc;
    out.g = SurfaceGrid(pair.f.nx, pair.f.ny, pair.f.hx, pair.f.hy, pair.f.x0, pair.f.y0,
                        pair.f.dim);
    out.g.i0 = pair.f.i0;
    out.g.j0 = pair.f.j0;

    for (int j = 0; j < pair.f.ny; ++j)
        for (int i = 0; i < pair.f.nx; ++i) {
            VahlenC inv = fa.at(i, j).conjugate_cl();
            VahlenC omega = inv * omega0 * inv.transpose_cl();
            auto coords = vahlen_vector_coords(omega);
            // omega = (v, s; t, -v): null-cone drift |v.v - s t|
            cplx vv(0, 0);
            for (int k = 0; k < pair.f.dim; ++k) vv += coords[1 + k] * coords[1 + k];
            cplx sblk = -2.0 * coords[pair.f.dim + 1];
            cplx tblk = coords[0];
            out.omega_null_drift = std::max(out.omega_null_drift, std::abs(vv - sblk * tblk));

            double scale = 0;
            for (const auto& z : coords) scale = std::max(scale, std::abs(z));
            double vnorm = 0;
            for (int k = 0; k < pair.f.dim; ++k) vnorm = std::max(vnorm, std::abs(coords[1 + k]));
            if (std::abs(tblk) < 1e-9 * (1 + scale) || vnorm < 1e-12 * (1 + scale)) {
                out.pair.f.set_mask(i, j, false);
                out.pair.fc.set_mask(i, j, false);
                out.g.set_mask(i, j, false);
                continue;
            }
            cplx denom = tblk * p.alpha;
            auto fdst = out.pair.f.at(i, j);
            auto cdst = out.pair.fc.at(i, j);
            auto gdst = out.g.at(i, j);
            double g2 = 0;
            for (int k = 0; k < pair.f.dim; ++k) {
                cplx gk = coords[1 + k] / denom;
                out.max_imag = std::max(out.max_imag, std::abs(gk.imag()));
                gdst[k] = gk.real();
                g2 += gdst[k] * gdst[k];
            }
            for (int k = 0; k < pair.f.dim; ++k) {
                fdst[k] = pair.f.at(i, j)[k] + gdst[k];
                // (r g)^{-1} = -g / (r |g|^2) for the Euclidean vector g
                cdst[k] = pair.fc.at(i, j)[k] - gdst[k] / (r * g2);
            }
        }
    return out;
}

struct PermutedFactors {
    SimpleFactor p1_new;  // poles at alpha_1, line transported by p2
    SimpleFactor p2_new;  // poles at alpha_2, line transported by p1
    double product_residual = 0;
};

// L1' = p_{a2,L2}(a1) L1, L2' = p_{a1,L1}(a2) L2; then
// p_{a1,L1'} p_{a2,L2} = p_{a2,L2'} p_{a1,L1} identically in lambda.
inline PermutedFactors permutability_factors(const SimpleFactor& p1, const SimpleFactor& p2,
                                             int residual_samples = 64) {
    if (std::abs(p1.alpha * p1.alpha - p2.alpha * p2.alpha) < 1e-12)
        fail(errc::equal_parameters, "factors need distinct alpha^2");
    int total = p1.total();
    auto transport = [&](const SimpleFactor& by, const SimpleFactor& of) {
        linalg::MatC m = evaluate_factor(by, of.alpha);
        std::vector<cplx> moved(total, cplx(0, 0));
        for (int i = 0; i < total; ++i)
            for (int j = 0; j < total; ++j) moved[i] += m(i, j) * of.ell[j];
        // reject lines collapsing onto <v0> or <v_inf>
        double body = 0, scale = 0;
        for (int k = 0; k < total; ++k) scale = std::max(scale, std::abs(moved[k]));
        for (int k = 1; k + 1 < total; ++k) body = std::max(body, std::abs(moved[k]));
        if (body < 1e-10 * scale) fail(errc::degenerate_line, "transported line degenerates");
        return make_simple_factor_from_line(of.alpha, moved, of.n);
    };
    PermutedFactors out;
    out.p1_new = transport(p2, p1);
    out.p2_new = transport(p1, p2);
    out.p1_new.seed_v = p1.seed_v;
    out.p1_new.f_o = p1.f_o;
    out.p2_new.seed_v = p2.seed_v;
    out.p2_new.f_o = p2.f_o;

    double rad = 0.37 * std::min(std::abs(p1.alpha), std::abs(p2.alpha));
    for (int s = 0; s < residual_samples; ++s) {
        double th = 2 * 3.14159265358979323846 * (s + 0.3) / residual_samples;
        cplx lambda = rad * cplx(std::cos(th), std::sin(th));
        linalg::MatC lhs = evaluate_factor(out.p1_new, lambda) * evaluate_factor(p2, lambda);
        linalg::MatC rhs = evaluate_factor(out.p2_new, lambda) * evaluate_factor(p1, lambda);
        out.product_residual = std::max(out.product_residual, (lhs - rhs).max_abs());
    }
    return out;
}

}  // namespace isothermic
