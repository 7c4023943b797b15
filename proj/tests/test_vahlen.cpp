#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isothermic/vahlen.hpp"
#include "oracles.hpp"

using namespace isothermic;

namespace {

const Signature cl3 = make_signature(3, 0);

Mv e(int i) { return Mv::basis_vector(cl3, i); }
Mv vec3(double x, double y, double z) {
    std::vector<double> c{x, y, z};
    return Mv::vector(cl3, c);
}

Vahlen translation(const Mv& t) {
    Signature sig = t.sig();
    return {Mv::scalar(sig, 1.0), t, Mv(sig), Mv::scalar(sig, 1.0)};
}

Vahlen inversion_matrix(Signature sig) {
    return {Mv(sig), Mv::scalar(sig, -1.0), Mv::scalar(sig, 1.0), Mv(sig)};
}

Vahlen dilation(Signature sig, double s) {
    return {Mv::scalar(sig, s), Mv(sig), Mv(sig), Mv::scalar(sig, 1.0 / s)};
}

Vahlen vector_rotation(const Mv& u) {
    // diag(u, -u): a unit-vector Vahlen element acting as a point reflection
    return {u, Mv(u.sig()), Mv(u.sig()), -u};
}

Vahlen random_vahlen(oracle::Rng& rng, Signature sig, int factors = 4) {
    Vahlen m = Vahlen::identity(sig);
    for (int k = 0; k < factors; ++k) {
        switch (rng.integer(0, 3)) {
            case 0: m = m * translation(oracle::random_vector<double>(rng, sig)); break;
            case 1: m = m * inversion_matrix(sig); break;
            case 2: m = m * dilation(sig, rng.uniform(0.4, 2.2)); break;
            default: m = m * vector_rotation(oracle::random_unit_vector(rng, sig)); break;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("model relations: v0, vinf") {
    auto v0 = v_zero<double>(cl3);
    auto vi = v_infinity<double>(cl3);
    Vahlen anti = v0 * vi + vi * v0;
    // v0 vinf + vinf v0 = 1, i.e. (v0, vinf) = -1/2
    CHECK((anti - Vahlen::identity(cl3)).max_abs() == doctest::Approx(0.0));
}

TEST_CASE("minkowski square of embedded vectors") {
    oracle::Rng rng(3);
    for (int it = 0; it < 40; ++it) {
        Mv x = oracle::random_vector<double>(rng, cl3);
        Vahlen v = lightcone_embed(x);
        Vahlen sq = v * v;
        CHECK(sq.max_abs() <= 1e-13 * (1 + v.max_abs() * v.max_abs()));
        auto back = stereo_project(v);
        CHECK(!back.infinite);
        CHECK((back.x - x).max_abs() <= 1e-13);
        // projective invariance
        auto scaled = stereo_project(v * 2.0);
        CHECK((scaled.x - x).max_abs() <= 1e-13);
    }
    CHECK((lightcone_embed(Mv(cl3)) - v_zero<double>(cl3)).max_abs() == doctest::Approx(0.0));

    // embed(e1) has scalar block (x,x) = 1
    Vahlen ve = lightcone_embed(e(0));
    CHECK(ve.b.scalar_part() == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)stereo_project(v_infinity<double>(cl3)), const error&);
}

TEST_CASE("vahlen conditions") {
    CHECK(is_vahlen(Vahlen::identity(cl3)).first);
    CHECK(is_vahlen(inversion_matrix(cl3)).first);

    Vahlen bad{e(0), Mv::scalar(cl3, 1.0), Mv(cl3), Mv(cl3)};
    auto [ok, diag] = is_vahlen(bad);
    CHECK(!ok);
    CHECK(!diag.pseudo_det_nonzero_scalar);

    oracle::Rng rng(5);
    for (int it = 0; it < 60; ++it) {
        Vahlen m1 = random_vahlen(rng, cl3);
        Vahlen m2 = random_vahlen(rng, cl3);
        CHECK(is_vahlen(m1).first);
        CHECK(is_vahlen(m1 * m2).first);
    }
}

TEST_CASE("mobius action basics") {
    Mv x = vec3(0.3, -0.7, 0.2);
    auto px = ConformalPoint<double>::finite(x);

    auto idr = mobius_apply(Vahlen::identity(cl3), px);
    CHECK((idr.x - x).max_abs() == doctest::Approx(0.0));

    // (0,-1;1,0) acts as inversion in the unit sphere
    auto inv = mobius_apply(inversion_matrix(cl3), px);
    double xx = inner(x, x);
    CHECK((inv.x - x * (1.0 / xx)).max_abs() <= 1e-13);

    Mv t = vec3(1.0, 2.0, -0.5);
    auto tr = mobius_apply(translation(t), px);
    CHECK((tr.x - (x + t)).max_abs() <= 1e-14);

    // 0 -> infinity under inversion
    auto at0 = mobius_apply(inversion_matrix(cl3), ConformalPoint<double>::finite(Mv(cl3)));
    CHECK(at0.infinite);
    auto atinf = mobius_apply(inversion_matrix(cl3), ConformalPoint<double>::infinity(cl3));
    CHECK(!atinf.infinite);
    CHECK(atinf.x.max_abs() <= 1e-14);
}

TEST_CASE("mobius composition and light-cone equivariance") {
    oracle::Rng rng(7);
    for (int it = 0; it < 60; ++it) {
        Vahlen m1 = random_vahlen(rng, cl3);
        Vahlen m2 = random_vahlen(rng, cl3);
        ConformalPoint<double> x =
            (it % 7 == 0) ? ConformalPoint<double>::infinity(cl3)
                          : ConformalPoint<double>::finite(oracle::random_vector<double>(rng, cl3));

        auto lhs = mobius_apply(m1 * m2, x);
        auto rhs = mobius_apply(m1, mobius_apply(m2, x));
        CHECK(lhs.infinite == rhs.infinite);
        if (!lhs.infinite) CHECK((lhs.x - rhs.x).max_abs() <= 1e-9 * (1 + lhs.x.max_abs()));

        if (!x.infinite) {
            // tAd(M) embed(x) proportional to embed(M.x)
            Vahlen moved = vahlen_twisted_adjoint(m1, lightcone_embed(x.x));
            auto img = mobius_apply(m1, x);
            if (!img.infinite) {
                Vahlen expect = lightcone_embed(img.x);
                double lam = moved.c.scalar_part() / expect.c.scalar_part();
                CHECK((moved - expect * lam).max_abs() <= 1e-9 * (1 + moved.max_abs()));
            } else {
                CHECK(moved.a.max_abs() + moved.c.max_abs() + moved.d.max_abs() <=
                      1e-9 * (1 + moved.max_abs()));
            }
        }
    }
}

TEST_CASE("cross ratio examples") {
    // repeated-surface configuration has ratio 1: C(a, b, a, c) = 1
    Mv f = vec3(0.1, 0.2, 0.0), f1 = vec3(1.0, 0.5, -0.3), f2 = vec3(-0.4, 0.9, 1.1);
    Mv fa = f + vec3(1e-7, 0, 0);  // separate the repeated point numerically
    auto [cr_rep, real_rep] = cross_ratio(f, f1, fa, f2, 1e-4);
    CHECK(real_rep);
    CHECK(cr_rep.scalar_part() == doctest::Approx(1.0).epsilon(1e-5));

    // collinear points -> complex cross-ratio oracle on the line
    auto [cr, is_real] = cross_ratio(Mv(cl3), e(0), e(0) * 2.0, e(0) * 3.0);
    CHECK(is_real);
    CHECK(cr.scalar_part() == doctest::Approx(-1.0 / 3.0));
    auto z = oracle::complex_cross_ratio(0, 1, 2, 3);
    CHECK(cr.scalar_part() == doctest::Approx(z.real()));
    CHECK(z.imag() == doctest::Approx(0.0));

    CHECK_THROWS_AS((void)cross_ratio(f, f, f1, f2), const error&);
}

TEST_CASE("cross ratio scalar part is mobius invariant") {
    oracle::Rng rng(13);
    for (int it = 0; it < 50; ++it) {
        Mv v[4];
        for (auto& p : v) p = oracle::random_vector<double>(rng, cl3);
        Vahlen m = random_vahlen(rng, cl3);
        Mv w[4];
        bool all_finite = true;
        for (int i = 0; i < 4; ++i) {
            auto img = mobius_apply(m, ConformalPoint<double>::finite(v[i]));
            if (img.infinite) {
                all_finite = false;
                break;
            }
            w[i] = img.x;
        }
        if (!all_finite) continue;
        auto [c0, r0] = cross_ratio(v[0], v[1], v[2], v[3]);
        auto [c1, r1] = cross_ratio(w[0], w[1], w[2], w[3]);
        CHECK(c0.scalar_part() == doctest::Approx(c1.scalar_part()).epsilon(1e-7));
        CHECK(r0 == r1);
    }
}

TEST_CASE("planar quadruples match the complex oracle") {
    oracle::Rng rng(19);
    for (int it = 0; it < 50; ++it) {
        cplx z[4];
        Mv v[4];
        for (int i = 0; i < 4; ++i) {
            z[i] = cplx(rng.uniform(-2, 2), rng.uniform(-2, 2));
            v[i] = vec3(z[i].real(), z[i].imag(), 0.0);
        }
        auto [cr, is_real] = cross_ratio(v[0], v[1], v[2], v[3]);
        cplx zc = oracle::complex_cross_ratio(z[0], z[1], z[2], z[3]);
        // scalar part matches Re, and reality detects concircularity
        CHECK(cr.scalar_part() == doctest::Approx(zc.real()).epsilon(1e-9));
        CHECK(is_real == (std::abs(zc.imag()) <= 1e-9 * (1.0 + std::abs(zc))));
    }
}

TEST_CASE("exp and log round trip") {
    oracle::Rng rng(29);
    for (int it = 0; it < 30; ++it) {
        Vahlen m(cl3);
        m.b = oracle::random_vector<double>(rng, cl3) * 0.05;
        m.c = oracle::random_vector<double>(rng, cl3) * 0.05;
        Vahlen g = vahlen_exp(m);
        CHECK(is_vahlen(g).first);
        Vahlen back = vahlen_log_near_identity(g);
        CHECK((back - m).max_abs() <= 1e-13);
    }
}

TEST_CASE("renormalization restores the group constraint") {
    oracle::Rng rng(31);
    Vahlen m = random_vahlen(rng, cl3);
    Vahlen drift = m * 1.003;
    vahlen_renormalize(drift);
    CHECK(drift.norm_scalar() == doctest::Approx(1.0).epsilon(1e-12));
}
