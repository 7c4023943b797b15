#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isothermic/surface.hpp"
#include "oracles.hpp"

using namespace isothermic;

namespace {

SeedParams small_params(int n = 41) {
    SeedParams p;
    p.nx = p.ny = n;
    return p;
}

SeedParams cylinder_params(int nx = 81, int ny = 41) {
    SeedParams p;
    p.xmin = 0;
    p.xmax = 3.14159265358979323846;
    p.ymin = -1;
    p.ymax = 1;
    p.nx = nx;
    p.ny = ny;
    return p;
}

}  // namespace

TEST_CASE("d_form exact on affine maps, zero on constants") {
    auto g = SurfaceGrid::sample(11, 9, 0.1, 0.2, -0.5, -0.8, 3,
                                 [](double x, double y, std::span<double> v) {
                                     v[0] = x;
                                     v[1] = y;
                                     v[2] = 1 + 2 * x - 3 * y;
                                 });
    GridOneForm df = d_form(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            CHECK(df.ax.at(i, j)[0] == doctest::Approx(1.0));
            CHECK(df.ax.at(i, j)[1] == doctest::Approx(0.0));
            CHECK(df.ax.at(i, j)[2] == doctest::Approx(2.0));
            CHECK(df.ay.at(i, j)[1] == doctest::Approx(1.0));
            CHECK(df.ay.at(i, j)[2] == doctest::Approx(-3.0));
        }

    auto c = SurfaceGrid::sample(9, 9, 0.1, 0.1, 0, 0, 2,
                                 [](double, double, std::span<double> v) {
                                     v[0] = 4;
                                     v[1] = -1;
                                 });
    CHECK_THROWS_AS((void)d_form(c), const error&);  // constants are not immersions
    SurfaceGrid cx = deriv_x(c);
    CHECK(cx.vals[0] == doctest::Approx(0.0));
}

TEST_CASE("derivative stencils converge at expected order") {
    auto make = [](int n) {
        return SurfaceGrid::sample(n, 5, 1.0 / (n - 1), 0.25, 0, 0, 2,
                                   [](double x, double y, std::span<double> v) {
                                       v[0] = std::sin(3 * x) + y;
                                       v[1] = x;
                                   });
    };
    auto err = [&](int n) {
        auto g = make(n);
        auto gx = deriv_x(g);
        double worst = 0;
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::abs(gx.at(i, 2)[0] - 3 * std::cos(3 * g.x(i))));
        return worst;
    };
    double e1 = err(41), e2 = err(81);
    CHECK(e1 / e2 > 3.5);  // boundary stencils are second order
    CHECK(e1 < 1e-2);
}

TEST_CASE("wedge basics") {
    Signature s3 = make_signature(3, 0);
    auto g = seed_plane(small_params(11)).f;
    GridOneForm alpha = d_form(g);  // e1 dx + e2 dy
    auto w = wedge(alpha, alpha);
    // alpha ^ alpha = e1 e2 - e2 e1 = 2 e1e2: the Clifford wedge is not alternating
    Mv expect = Mv::basis_vector(s3, 0) * Mv::basis_vector(s3, 1) * 2.0;
    CHECK((w[g.node(5, 5)] - expect).max_abs() <= 1e-12);

    GridOneForm beta = alpha;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            auto bx = beta.ax.at(i, j), by = beta.ay.at(i, j);
            bx[0] = 1;
            bx[1] = 0;
            by[0] = 1;
            by[1] = 0;  // beta = e1 dx + e1 dy
        }
    auto w2 = wedge(alpha, beta);
    // e1 e1 - e2 e1 = -1 + e1e2
    Mv expect2 = Mv::scalar(s3, -1.0) + Mv::basis_vector(s3, 0) * Mv::basis_vector(s3, 1);
    CHECK((w2[g.node(5, 5)] - expect2).max_abs() <= 1e-12);
}

TEST_CASE("plane pair is isothermic to machine precision") {
    auto pair = seed_plane(small_params(31));
    auto r = isothermic_residual(pair.f, pair.fc);
    CHECK(r.max <= 1e-12);
}

TEST_CASE("cylinder residuals: analytic pair cancels, integrated dual is O(h^2)") {
    // the closed-form dual mirrors f's x-derivative exactly, so the discrete
    // wedge cancels to machine precision
    auto exact = seed_cylinder(cylinder_params(81, 41));
    CHECK(isothermic_residual(exact.f, exact.fc).max <= 1e-12);

    // a numerically integrated dual carries the honest O(h^2) error
    auto integ = [&](int nx, int ny) {
        auto pair = seed_cylinder(cylinder_params(nx, ny));
        auto res = christoffel_transform(pair.f, -1.0);
        return isothermic_residual(pair.f, res.pair.fc).max;
    };
    double r1 = integ(81, 41), r2 = integ(161, 81);
    CHECK(r1 / r2 > 3.3);
    CHECK(r1 < 1e-2);

    // negative control: a generic perturbation is far from isothermic
    auto pair = seed_cylinder(cylinder_params(81, 41));
    SurfaceGrid bad = pair.fc;
    for (int j = 0; j < bad.ny; ++j)
        for (int i = 0; i < bad.nx; ++i)
            bad.at(i, j)[0] += 0.05 * std::sin(3 * bad.x(i)) * std::cos(2 * bad.y(j));
    auto rb = isothermic_residual(pair.f, bad);
    CHECK(rb.max > 1e-3);
}

TEST_CASE("christoffel transform reproduces the closed-form duals") {
    auto plane = seed_plane(small_params(41));
    auto res = christoffel_transform(plane.f, 1.0);
    // integrated dual differs from the closed form by a constant
    Signature s3 = make_signature(3, 0);
    Mv offset = res.pair.fc.value_mv(s3, 0, 0) - plane.fc.value_mv(s3, 0, 0);
    double worst = 0;
    for (int j = 0; j < plane.f.ny; ++j)
        for (int i = 0; i < plane.f.nx; ++i) {
            Mv d = res.pair.fc.value_mv(s3, i, j) - plane.fc.value_mv(s3, i, j) - offset;
            worst = std::max(worst, d.max_abs());
        }
    CHECK(worst <= 1e-10);

    auto cyl = seed_cylinder(cylinder_params());
    auto resc = christoffel_transform(cyl.f, -1.0);
    Mv offc = resc.pair.fc.value_mv(s3, 0, 0) - cyl.fc.value_mv(s3, 0, 0);
    double worstc = 0;
    for (int j = 0; j < cyl.f.ny; ++j)
        for (int i = 0; i < cyl.f.nx; ++i) {
            Mv d = resc.pair.fc.value_mv(s3, i, j) - cyl.fc.value_mv(s3, i, j) - offc;
            worstc = std::max(worstc, d.max_abs());
        }
    CHECK(worstc <= 1e-3);

    CHECK_THROWS_AS((void)christoffel_transform(plane.f, 0.0), const error&);
    // non-conformal input is rejected
    auto skew = SurfaceGrid::sample(21, 21, 0.1, 0.1, 0, 0, 3,
                                    [](double x, double y, std::span<double> v) {
                                        v[0] = 2 * x;
                                        v[1] = y;
                                    });
    CHECK_THROWS_AS((void)christoffel_transform(skew, 1.0), const error&);
}

TEST_CASE("christoffel transform is an involution up to normalization") {
    auto cyl = seed_cylinder(cylinder_params());
    auto dual = christoffel_transform(cyl.f, -1.0);
    // dual of the dual with 1/q recovers f up to translation
    auto back = christoffel_transform(dual.pair.fc, -1.0);
    Signature s3 = make_signature(3, 0);
    Mv offset = back.pair.fc.value_mv(s3, cyl.f.i0, cyl.f.j0) -
                cyl.f.value_mv(s3, cyl.f.i0, cyl.f.j0);
    double worst = 0;
    for (int j = 0; j < cyl.f.ny; ++j)
        for (int i = 0; i < cyl.f.nx; ++i)
            worst = std::max(worst,
                             (back.pair.fc.value_mv(s3, i, j) - cyl.f.value_mv(s3, i, j) - offset)
                                 .max_abs());
    CHECK(worst <= 1e-3);
}

TEST_CASE("polarisation extraction matches the seed normalization") {
    auto plane = seed_plane(small_params(21));
    auto qf = polarisation_field(plane.f, plane.fc);
    CHECK(qf.at_base.real() == doctest::Approx(1.0));
    CHECK(qf.at_base.imag() == doctest::Approx(0.0));

    auto cyl = seed_cylinder(cylinder_params(41, 21));
    auto qc = polarisation_field(cyl.f, cyl.fc);
    CHECK(qc.at_base.real() == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("polarisation is holomorphic: dbar q = O(h^2)") {
    auto make = [&](int nx, int ny) {
        auto cyl = seed_cylinder(cylinder_params(nx, ny));
        auto qf = polarisation_field(cyl.f, cyl.fc);
        SurfaceGrid re(nx, ny, cyl.f.hx, cyl.f.hy, cyl.f.x0, cyl.f.y0, 2);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                re.at(i, j)[0] = qf.q[re.node(i, j)].real();
                re.at(i, j)[1] = qf.q[re.node(i, j)].imag();
            }
        SurfaceGrid qx = deriv_x(re), qy = deriv_y(re);
        double worst = 0;
        for (int j = 4; j + 4 < ny; ++j)
            for (int i = 4; i + 4 < nx; ++i) {
                // dbar q = 1/2 (dq/dx + i dq/dy)
                cplx dq(qx.at(i, j)[0] - qy.at(i, j)[1], qx.at(i, j)[1] + qy.at(i, j)[0]);
                worst = std::max(worst, std::abs(dq) * 0.5);
            }
        return worst;
    };
    // q is constant on these charts, so the residual sits at rounding level,
    // far below the O(h^2) bound
    CHECK(make(41, 21) <= 1e-8);
    CHECK(make(81, 41) <= 1e-8);
}

TEST_CASE("revolution seed closes at O(h^2)") {
    auto err = [](int n) {
        SeedParams p;
        p.xmin = -0.8;
        p.xmax = 0.8;
        p.ymin = 0.0;
        p.ymax = 1.6;
        p.nx = p.ny = n;
        auto f = SurfaceGrid::sample(n, n, 1.6 / (n - 1), 1.6 / (n - 1), p.xmin, p.ymin, 3,
                                     [](double x, double y, std::span<double> v) {
                                         v[0] = std::cosh(x) * std::cos(y);
                                         v[1] = std::cosh(x) * std::sin(y);
                                         v[2] = x;
                                     });
        Tolerances tols = default_tols();
        tols.conformal_rel_tol = 1e-3;
        auto res = christoffel_transform(f, 1.0, tols);
        return res.closedness;
    };
    double e1 = err(41), e2 = err(81);
    CHECK(e1 / e2 > 3.0);

    SeedParams p;
    p.xmin = -0.8;
    p.xmax = 0.8;
    p.ymin = 0;
    p.ymax = 1.6;
    p.nx = p.ny = 61;
    auto pair = seed_revolution(p);
    auto r = isothermic_residual(pair.f, pair.fc);
    CHECK(r.max < 5e-2);
}

TEST_CASE("envelope residual: parallel planes and negative control") {
    auto plane = seed_plane(small_params(21));
    SurfaceGrid offset = plane.f;
    for (int j = 0; j < offset.ny; ++j)
        for (int i = 0; i < offset.nx; ++i) offset.at(i, j)[2] += 1.0;
    auto r = envelope_residual(plane.f, offset);
    CHECK(r.max <= 1e-10);

    SurfaceGrid random_surface = plane.f;
    oracle::Rng rng(77);
    for (int j = 0; j < random_surface.ny; ++j)
        for (int i = 0; i < random_surface.nx; ++i) {
            random_surface.at(i, j)[0] = 3 + 0.4 * std::sin(2 * random_surface.x(i));
            random_surface.at(i, j)[1] += 0.3 * std::cos(random_surface.y(j));
            random_surface.at(i, j)[2] = 2 + 0.5 * random_surface.x(i) * random_surface.y(j);
        }
    auto rb = envelope_residual(plane.f, random_surface);
    CHECK(rb.max > 0.1);
}

TEST_CASE("mobius image of a pair stays isothermic at the same order") {
    // inversion T(x) = x / |x|^2 with the induced dual eta = f dfc f
    SeedParams p;
    p.xmin = 2.0;
    p.xmax = 3.0;
    p.ymin = -0.5;
    p.ymax = 0.5;
    auto run = [&](int n) {
        p.nx = p.ny = n;
        auto cyl = [&] {
            auto pr = seed_plane(p);
            for (int j = 0; j < pr.f.ny; ++j)
                for (int i = 0; i < pr.f.nx; ++i) {
                    double x = pr.f.x(i), y = pr.f.y(j);
                    pr.f.at(i, j)[0] = 0.5 * std::sin(2 * x) + 2.0;
                    pr.f.at(i, j)[1] = 0.5 * (1 - std::cos(2 * x));
                    pr.f.at(i, j)[2] = y;
                    pr.fc.at(i, j)[0] = -0.5 * std::sin(2 * x);
                    pr.fc.at(i, j)[1] = -0.5 * (1 - std::cos(2 * x));
                    pr.fc.at(i, j)[2] = y;
                }
            return pr;
        }();
        Signature s3 = make_signature(3, 0);
        SurfaceGrid finv = cyl.f;
        GridOneForm dfc = d_form(cyl.fc);
        GridOneForm eta{cyl.f, cyl.f};
        for (int j = 0; j < cyl.f.ny; ++j)
            for (int i = 0; i < cyl.f.nx; ++i) {
                Mv fv = cyl.f.value_mv(s3, i, j);
                finv.set_value_mv(i, j, -invert(fv));
                eta.ax.set_value_mv(i, j, fv * dfc.ax.value_mv(s3, i, j) * fv);
                eta.ay.set_value_mv(i, j, fv * dfc.ay.value_mv(s3, i, j) * fv);
            }
        SurfaceGrid fc_inv = integrate_oneform(eta);
        return isothermic_residual(finv, fc_inv).max;
    };
    double e1 = run(41), e2 = run(81);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 < 1e-2);
}
