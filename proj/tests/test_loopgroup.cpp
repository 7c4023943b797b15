#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isothermic/loopgroup.hpp"
#include "oracles.hpp"

using namespace isothermic;

namespace {

const Signature s3 = make_signature(3, 0);
const double kPi = 3.14159265358979323846;

ChristoffelPair plane_pair(int n = 101) {
    SeedParams p;
    p.nx = p.ny = n;
    return seed_plane(p);
}

ChristoffelPair cylinder_pair_based_at_origin(int nx = 159, int ny = 101) {
    SeedParams p;
    p.xmin = 0;
    p.xmax = kPi;
    p.ymin = -1;
    p.ymax = 1;
    p.nx = nx;
    p.ny = ny;
    auto pair = seed_cylinder(p);
    pair.f.i0 = pair.fc.i0 = 0;  // the closed-form frame is based at x = 0
    return pair;
}

VahlenC plane_closed_frame(double x, double y, double lambda) {
    MvC e1 = complexify(Mv::basis_vector(s3, 0));
    MvC e2 = complexify(Mv::basis_vector(s3, 1));
    Signature sig = s3;
    VahlenC exp1(sig), exp2(sig);
    // exp(l x E1) with E1 = (0, e1; e1, 0), E1^2 = -1
    exp1.a = MvC::scalar(sig, std::cos(lambda * x));
    exp1.d = exp1.a;
    exp1.b = e1 * cplx(std::sin(lambda * x), 0);
    exp1.c = exp1.b;
    // exp(l y E2) with E2 = (0, e2; -e2, 0), E2^2 = +1
    exp2.a = MvC::scalar(sig, std::cosh(lambda * y));
    exp2.d = exp2.a;
    exp2.b = e2 * cplx(std::sinh(lambda * y), 0);
    exp2.c = -exp2.b;
    return exp1 * exp2;
}

VahlenC cylinder_closed_frame(double x, double y, double lambda) {
    Signature sig = s3;
    MvC e1 = complexify(Mv::basis_vector(s3, 0));
    MvC e3 = complexify(Mv::basis_vector(s3, 2));
    MvC e12 = complexify(Mv::basis_vector(s3, 0) * Mv::basis_vector(s3, 1));

    double disc = lambda * lambda - 1;
    double c, s;
    if (std::abs(disc) < 1e-14) {
        c = 1;
        s = x;
    } else if (disc > 0) {
        double w = std::sqrt(disc);
        c = std::cosh(x * w);
        s = std::sinh(x * w) / w;
    } else {
        double w = std::sqrt(-disc);
        c = std::cos(x * w);
        s = std::sin(x * w) / w;
    }
    VahlenC first(sig);
    first.a = MvC::scalar(sig, c) + e12 * cplx(s, 0);
    first.d = first.a;
    first.b = e1 * cplx(lambda * s, 0);
    first.c = -first.b;

    VahlenC second(sig);
    second.a = MvC::scalar(sig, std::cos(lambda * y));
    second.d = second.a;
    second.b = e3 * cplx(std::sin(lambda * y), 0);
    second.c = second.b;

    VahlenC third(sig);
    third.a = MvC::scalar(sig, std::cos(x)) - e12 * cplx(std::sin(x), 0);
    third.d = third.a;

    return first * second * third;
}

double frame_diff(const FrameField<cplx>& f, double lambda,
                  const SurfaceGrid& dom,
                  VahlenC (*closed)(double, double, double)) {
    double worst = 0;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            if (f.mask[f.node(i, j)] == 0) continue;
            worst = std::max(worst,
                             (f.at(i, j) - closed(dom.x(i), dom.y(j), lambda)).max_abs());
        }
    return worst;
}

double max_grid_diff(const SurfaceGrid& a, const SurfaceGrid& b, bool mod_translation = false) {
    double off[8] = {0};
    if (mod_translation) {
        auto va = a.at(a.i0, a.j0);
        auto vb = b.at(a.i0, a.j0);
        for (int k = 0; k < a.dim; ++k) off[k] = va[k] - vb[k];
    }
    double worst = 0;
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i) {
            if (!a.valid(i, j) || !b.valid(i, j)) continue;
            for (int k = 0; k < a.dim; ++k)
                worst = std::max(worst, std::abs(a.at(i, j)[k] - b.at(i, j)[k] - off[k]));
        }
    return worst;
}

}  // namespace

TEST_CASE("plane extended frame matches the product of exponentials") {
    auto pair = plane_pair(81);
    std::vector<cplx> lambdas{cplx(0, 0), cplx(0.7, 0), cplx(-0.7, 0), cplx(1, 0), cplx(-1, 0)};
    auto phi = extended_frame(pair, lambdas);
    CHECK(frame_diff(phi.frames[1], 0.7, pair.f, plane_closed_frame) <= 1e-8);
    CHECK(frame_diff(phi.frames[3], 1.0, pair.f, plane_closed_frame) <= 1e-8);

    // lambda = 0 is the identity everywhere
    Signature sig = s3;
    CHECK((phi.frames[0].at(3, 5) - VahlenC::identity(sig)).max_abs() == doctest::Approx(0.0));

    auto rep = frame_invariants(phi);
    CHECK(rep.reality <= 1e-10);
    CHECK(rep.twisting <= 1e-10);
    CHECK(rep.group_defect <= 1e-10);
}

TEST_CASE("cylinder extended frame matches the closed form") {
    auto pair = cylinder_pair_based_at_origin();
    std::vector<cplx> lambdas{cplx(0, 0), cplx(0.5, 0), cplx(-0.5, 0), cplx(1, 0), cplx(-1, 0)};
    auto phi = extended_frame(pair, lambdas);
    CHECK(frame_diff(phi.frames[1], 0.5, pair.f, cylinder_closed_frame) <= 1e-6);
    CHECK(frame_diff(phi.frames[3], 1.0, pair.f, cylinder_closed_frame) <= 1e-6);
}

TEST_CASE("sym formula recovers the generating pair") {
    double eps = 1e-3;
    auto pair = cylinder_pair_based_at_origin();
    std::vector<cplx> lambdas{cplx(0, 0), cplx(eps, 0), cplx(-eps, 0), cplx(2 * eps, 0),
                              cplx(-2 * eps, 0)};
    auto phi = extended_frame(pair, lambdas);
    auto sym = sym_formula(phi, eps);
    CHECK(sym.max_imag <= 1e-10);
    CHECK(max_grid_diff(sym.f0, pair.f, true) <= 1e-5);
    CHECK(max_grid_diff(sym.f0c, pair.fc, true) <= 1e-5);

    auto plane = plane_pair(61);
    auto phip = extended_frame(plane, lambdas);
    auto symp = sym_formula(phip, eps);
    CHECK(max_grid_diff(symp.f0, plane.f, true) <= 1e-8);
    CHECK(max_grid_diff(symp.f0c, plane.fc, true) <= 1e-8);
}

TEST_CASE("maurer-cartan data is linear in lambda") {
    double eps = 1e-3;
    std::vector<cplx> samples{cplx(0, 0), cplx(eps, 0), cplx(-eps, 0), cplx(2 * eps, 0),
                              cplx(-2 * eps, 0)};
    auto pair = plane_pair(41);
    auto phi = extended_frame(pair, samples);
    CHECK(mc_linearity_residual(phi, samples) <= 1e-8);

    auto cyl = cylinder_pair_based_at_origin(81, 51);
    auto phic = extended_frame(cyl, samples);
    CHECK(mc_linearity_residual(phic, samples) <= 1e-8);
}

TEST_CASE("simple factor construction and algebra") {
    std::vector<double> v{0.5, 1.0, 0.2}, fo{0.0, 0.0, 0.0};
    auto p = make_simple_factor(cplx(1, 0), v, fo);
    int total = p.total();
    linalg::MatD gram = lightcone::gram(total);

    // p(0) = identity
    auto at0 = evaluate_factor(p, cplx(0, 0));
    CHECK((at0 - linalg::MatC::identity(total)).max_abs() <= 1e-12);

    // orthogonality for the complex bilinear form at random lambda
    oracle::Rng rng(5);
    for (int it = 0; it < 20; ++it) {
        cplx lambda(rng.uniform(-2, 2), rng.uniform(-2, 2));
        if (std::abs(lambda - p.alpha) < 0.2 || std::abs(lambda + p.alpha) < 0.2) continue;
        auto m = evaluate_factor(p, lambda);
        linalg::MatC gtg(total, total);
        for (int i = 0; i < total; ++i)
            for (int j = 0; j < total; ++j) {
                cplx s(0, 0);
                for (int a = 0; a < total; ++a)
                    for (int b = 0; b < total; ++b) s += m(a, i) * cplx(gram(a, b), 0) * m(b, j);
                gtg(i, j) = s;
            }
        linalg::MatC gc(total, total);
        for (int i = 0; i < total; ++i)
            for (int j = 0; j < total; ++j) gc(i, j) = gram(i, j);
        CHECK((gtg - gc).max_abs() <= 1e-12);

        // reality and twisting of the loop
        auto mconj = evaluate_factor(p, std::conj(lambda));
        auto mneg = evaluate_factor(p, -lambda);
        double worst = 0;
        for (int i = 0; i < total; ++i)
            for (int j = 0; j < total; ++j) {
                worst = std::max(worst, std::abs(std::conj(m(i, j)) - mconj(i, j)));
                double sgn = ((i == 0 || i == total - 1) ? -1.0 : 1.0) *
                             ((j == 0 || j == total - 1) ? -1.0 : 1.0);
                worst = std::max(worst, std::abs(mneg(i, j) - sgn * m(i, j)));
            }
        CHECK(worst <= 1e-12);
    }

    // pole behavior: |p(lambda)| ~ C / |lambda - alpha|
    double near = evaluate_factor(p, p.alpha + cplx(1e-4, 0)).max_abs();
    double farther = evaluate_factor(p, p.alpha + cplx(1e-3, 0)).max_abs();
    CHECK(near / farther == doctest::Approx(10.0).epsilon(0.05));

    CHECK_THROWS_AS((void)evaluate_factor(p, p.alpha), const error&);
    CHECK_THROWS_AS((void)make_simple_factor(cplx(1, 1), v, fo), const error&);
    CHECK_THROWS_AS((void)make_simple_factor(cplx(1, 0), fo, fo), const error&);

    // imaginary alpha: conj(L) = rho L
    auto pi = make_simple_factor(cplx(0, 1), v, fo);
    auto rl = lightcone::rho(pi.ell);
    cplx ratio(0, 0);
    double worst = 0;
    for (int k = 0; k < total; ++k) {
        if (std::abs(rl[k]) > 0.5 && std::abs(ratio) == 0) ratio = std::conj(pi.ell[k]) / rl[k];
    }
    for (int k = 0; k < total; ++k)
        worst = std::max(worst, std::abs(std::conj(pi.ell[k]) - ratio * rl[k]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("dressing matches the darboux transform through the sym formula") {
    auto pair = plane_pair(81);
    std::vector<double> v{0.3, 1.1, 0.4};
    auto fo_span = pair.f.at(pair.f.i0, pair.f.j0);
    std::vector<double> fo(fo_span.begin(), fo_span.end());
    auto p = make_simple_factor(cplx(1, 0), v, fo);

    auto phi = extended_frame(pair, default_lambda_samples(p.alpha));
    auto dressed = dress(p, phi);
    CHECK(dressed.out_of_chart_fraction <= 0.05);

    auto rep = frame_invariants(dressed.phi);
    CHECK(rep.base_defect <= 1e-9);
    CHECK(rep.reality <= 1e-9);
    CHECK(rep.twisting <= 1e-9);

    double eps = 1e-3;
    std::vector<cplx> sym_samples{cplx(0, 0), cplx(eps, 0), cplx(-eps, 0), cplx(2 * eps, 0),
                                  cplx(-2 * eps, 0)};
    CHECK(mc_linearity_residual(dressed.phi, sym_samples) <= 1e-8);

    auto sym = sym_formula(dressed.phi, eps);
    auto riccati = darboux(pair, 1.0, v);
    CHECK(max_grid_diff(sym.f0, riccati.fhat, true) <= 1e-5);
    CHECK(max_grid_diff(sym.f0c, riccati.fhat_c, true) <= 1e-5);
}

TEST_CASE("direct dressed pair equals the riccati route for both alpha types") {
    auto pair = plane_pair(101);
    std::vector<double> v{0.3, 1.1, 0.4};
    auto fo_span = pair.f.at(pair.f.i0, pair.f.j0);
    std::vector<double> fo(fo_span.begin(), fo_span.end());

    for (cplx alpha : {cplx(1, 0), cplx(0, 1)}) {
        double r = (alpha * alpha).real();
        auto p = make_simple_factor(alpha, v, fo);
        auto direct = dress_pair_direct(p, pair);
        CAPTURE(alpha.real());
        CAPTURE(alpha.imag());
        CHECK(direct.omega_null_drift <= 1e-9);
        CHECK(direct.max_imag <= 1e-9);
        auto riccati = darboux(pair, r, v);
        CHECK(max_grid_diff(direct.pair.f, riccati.fhat) <= 1e-6);
        CHECK(max_grid_diff(direct.pair.fc, riccati.fhat_c) <= 1e-6);
    }
}

TEST_CASE("factor permutability: product identity and frame level") {
    std::vector<double> fo{0.0, 0.0, 0.0};
    std::vector<double> v1{0.4, 1.0, 0.3}, v2{-0.5, 0.8, -0.4};
    auto p1 = make_simple_factor(cplx(1, 0), v1, fo);
    auto p2 = make_simple_factor(cplx(0, 1.3), v2, fo);

    auto perm = permutability_factors(p1, p2);
    CHECK(perm.product_residual <= 1e-10);
    CHECK_THROWS_AS((void)permutability_factors(p1, p1), const error&);

    // frame level: p1' # (p2 # phi) = p2' # (p1 # phi)
    auto pair = plane_pair(41);
    // merge both factors' sample sets
    std::vector<cplx> lambdas = default_lambda_samples(p1.alpha);
    for (cplx extra : default_lambda_samples(p2.alpha)) {
        bool seen = false;
        for (const auto& l : lambdas)
            if (std::abs(l - extra) < 1e-15) seen = true;
        if (!seen) lambdas.push_back(extra);
    }
    auto phi = extended_frame(pair, lambdas);
    auto route_a = dress(perm.p1_new, dress(p2, phi).phi);
    auto route_b = dress(perm.p2_new, dress(p1, phi).phi);
    double worst = 0;
    for (std::size_t k = 0; k < route_a.phi.lambdas.size(); ++k) {
        int kb = route_b.phi.sample_index(route_a.phi.lambdas[k]);
        if (kb < 0) continue;
        const auto& fa = route_a.phi.frames[k];
        const auto& fb = route_b.phi.frames[kb];
        for (int j = 0; j < pair.f.ny; ++j)
            for (int i = 0; i < pair.f.nx; ++i) {
                if (fa.mask[fa.node(i, j)] == 0 || fb.mask[fb.node(i, j)] == 0) continue;
                worst = std::max(worst, (fa.at(i, j) - fb.at(i, j)).max_abs());
            }
    }
    CHECK(worst <= 1e-6);
}
