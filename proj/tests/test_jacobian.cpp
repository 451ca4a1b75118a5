#include <doctest.h>

#include <cmath>

#include "czlab/jacobian.hpp"
#include "czlab/rng.hpp"

using namespace czlab;

namespace {

Grid square(std::int64_t n) { return Grid(2, {0, 0, 0}, 1.0, n); }

/// Smooth compactly supported component: a bump times a trig polynomial,
/// supported in [0.375, 0.625]^2, well inside the unit box.
GridFunction smoothField(const Grid& g, double fx, double fy, double phase) {
    GridFunction phi = bumpFunction(g, Cube{{0.4375, 0.4375, 0}, 0.125, 0});
    GridFunction out(g);
    for (std::int64_t i : phi.supportCells()) {
        Point m = g.midpoint(i);
        out.values[i] = phi.values[i] *
                        std::sin(fx * m[0] + phase) * std::cos(fy * m[1]);
        out.support[i] = 1;
    }
    return out;
}

} // namespace

TEST_CASE("jacobianDet: windowed affine map has constant determinant inside") {
    Grid g = square(64);
    double A11 = 2, A12 = 0.5, A21 = -1, A22 = 1.5; // det = 3.5
    Cube window{{0.25, 0.25, 0}, 0.5, 0};
    VectorField u;
    for (int j = 0; j < 2; ++j) {
        GridFunction c(g);
        for (std::int64_t i : cellsIn(g, window)) {
            Point m = g.midpoint(i);
            c.values[i] = j == 0 ? A11 * m[0] + A12 * m[1]
                                 : A21 * m[0] + A22 * m[1];
            c.support[i] = 1;
        }
        u.comp.push_back(c);
    }
    GridFunction ju = jacobianDet(u);
    Cube interior{{0.25 + 3 * g.h(), 0.25 + 3 * g.h(), 0}, 0.5 - 6 * g.h(), 0};
    for (std::int64_t i : cellsIn(g, interior))
        CHECK(ju.values[i].real() == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("jacobianDet: degree-d homogeneity and the alternating property") {
    Grid g = square(64);
    VectorField u;
    u.comp.push_back(smoothField(g, 9, 5, 0.3));
    u.comp.push_back(smoothField(g, 4, 11, 1.1));
    GridFunction ju = jacobianDet(u);

    VectorField tu = u;
    for (auto& c : tu.comp) c *= Complex(3.0);
    GridFunction jtu = jacobianDet(tu);
    for (std::int64_t i = 0; i < g.totalCells(); ++i)
        CHECK(std::abs(jtu.values[i] - 9.0 * ju.values[i]) <=
              1e-9 * (1 + std::abs(ju.values[i])));

    VectorField swapped;
    swapped.comp.push_back(u.comp[1]);
    swapped.comp.push_back(u.comp[0]);
    GridFunction jsw = jacobianDet(swapped);
    for (std::int64_t i = 0; i < g.totalCells(); ++i)
        CHECK(std::abs(jsw.values[i] + ju.values[i]) <=
              1e-12 * (1 + std::abs(ju.values[i])));
}

TEST_CASE("jacobianDet: integral vanishes for compact support") {
    Grid g = square(128);
    VectorField u;
    u.comp.push_back(smoothField(g, 9, 5, 0.0));
    u.comp.push_back(smoothField(g, 4, 11, 0.7));
    GridFunction ju = jacobianDet(u);
    CHECK(std::abs(integrate(ju)) <= 1e-10 * std::max(1.0, ju.supNorm()));
}

TEST_CASE("jacobianDet: support near the boundary is rejected") {
    Grid g = square(32);
    VectorField u;
    GridFunction c(g);
    c.values[0] = 1.0;
    c.support[0] = 1;
    u.comp.push_back(c);
    u.comp.push_back(GridFunction(g));
    CHECK_THROWS_AS(jacobianDet(u), SupportTouchesBoundary);
}

TEST_CASE("bumpFunction: plateau, support, and gradient bound") {
    Grid g = square(128);
    Cube q{{0.4375, 0.4375, 0}, 0.125, 0};
    GridFunction phi = bumpFunction(g, q);
    Point center = q.center(2);
    for (std::int64_t i : cellsIn(g, q))
        CHECK(phi.values[i].real() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Point m = g.midpoint(i);
        bool in2Q = true;
        for (int k = 0; k < 2; ++k)
            if (std::abs(m[k] - center[k]) >= q.side) in2Q = false;
        if (!in2Q) CHECK(phi.values[i] == Complex(0));
    }
    for (int axis = 0; axis < 2; ++axis) {
        GridFunction d = detail::centralDiff(phi, axis, false);
        CHECK(d.supNorm() <= 3.0 / q.side + 1e-9);
    }
    Cube q2 = q;
    q2.corner[0] += 8 * g.h();
    GridFunction phi2 = bumpFunction(g, q2);
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Index3 idx = g.unflatten(i);
        if (idx[0] < 8) continue;
        Index3 src = idx;
        src[0] -= 8;
        CHECK(phi2.values[i] == phi.values[g.flatten(src)]);
    }
}

TEST_CASE("liftDerivativeToJacobian: determinant reproduces the derivative") {
    Grid g = square(128);
    Cube q{{0.3, 0.3, 0}, 0.4, 0};
    GridFunction w = smoothField(g, 7, 3, 0.4);
    for (int axis = 0; axis < 2; ++axis) {
        VectorField u = liftDerivativeToJacobian(w, axis, q);
        GridFunction ju = jacobianDet(u);
        GridFunction dw = detail::centralDiff(w, axis, false);
        double scale = dw.supNorm();
        for (std::int64_t i = 0; i < g.totalCells(); ++i)
            CHECK(std::abs(ju.values[i] - dw.values[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("liftDerivativeToJacobian: zero input and support guard") {
    Grid g = square(64);
    Cube q{{0.3, 0.3, 0}, 0.4, 0};
    VectorField u = liftDerivativeToJacobian(GridFunction(g), 1, q);
    CHECK(jacobianDet(u).supNorm() == 0);

    GridFunction wide = bumpFunction(g, Cube{{0.25, 0.25, 0}, 0.5, 0});
    CHECK_THROWS_AS(liftDerivativeToJacobian(wide, 0, q), SupportExceedsQ);
}

TEST_CASE("divSolve: single Fourier mode matches the closed form") {
    Grid g = square(128);
    GridFunction gf = GridFunction::fromFunction(
        g, [](Point p) { return Complex(std::sin(2 * kPi * p[0])); });
    VectorField v = divSolve(gf);
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Point m = g.midpoint(i);
        double oracle = -std::cos(2 * kPi * m[0]) / (2 * kPi);
        CHECK(std::abs(v.comp[0].values[i] - Complex(oracle)) < 1e-10);
        CHECK(std::abs(v.comp[1].values[i]) < 1e-12);
    }
}

TEST_CASE("divSolve: spectral residual vanishes for band-limited data") {
    Grid g = square(64);
    CounterRng rng(3, 0);
    std::vector<Complex> spec(g.totalCells(), Complex(0));
    std::uint64_t ctr = 0;
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Index3 idx = g.unflatten(i);
        bool keep = true;
        for (int k = 0; k < 2; ++k) {
            std::int64_t kk = idx[k] <= g.n / 2 ? idx[k] : idx[k] - g.n;
            if (std::abs(kk) > 3 * g.n / 8) keep = false;
        }
        if (keep && !(idx[0] == 0 && idx[1] == 0))
            spec[i] = Complex(rng.normal(ctr), rng.normal(ctr + 1));
        ctr += 2;
    }
    detail::dft(g, spec, +1);
    GridFunction gf(g);
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        gf.values[i] = spec[i].real();
        gf.support[i] = 1;
    }
    VectorField v = divSolve(gf);
    GridFunction div = spectralDivergence(v);
    double num = 0, den = 0;
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        num += std::norm(div.values[i] - gf.values[i]);
        den += std::norm(gf.values[i]);
    }
    CHECK(std::sqrt(num / den) <= 1e-8);
}

TEST_CASE("divSolve: non mean-zero input rejected; zero gives zero") {
    Grid g = square(32);
    GridFunction one =
        GridFunction::fromFunction(g, [](Point) { return Complex(1.0); });
    CHECK_THROWS_AS(divSolve(one), NotMeanZero);
    VectorField v = divSolve(GridFunction(g));
    CHECK(v.comp[0].supNorm() == 0);
    CHECK(v.comp[1].supNorm() == 0);
}

TEST_CASE("rootsOfUnityMoment: reference values") {
    CHECK(rootsOfUnityMoment(2, {1, 1}) == Rational{1, 1});
    CHECK(rootsOfUnityMoment(2, {1, 2}) == Rational{0, 1});
    CHECK(rootsOfUnityMoment(3, {1, 2, 2}) == Rational{0, 1});
    CHECK(rootsOfUnityMoment(3, {2, 2, 2}) == Rational{1, 1});
    CHECK(rootsOfUnityMoment(4, {1, 1, 1, 1}) == Rational{1, 1});
    CHECK(rootsOfUnityMoment(4, {1, 1, 2, 2}) == Rational{0, 1});
}

TEST_CASE("rootsOfUnityMoment: full enumeration agrees with the closed form") {
    for (int d = 2; d <= 4; ++d) {
        const int N = 5;
        std::vector<int> tuple(d, 1);
        while (true) {
            Rational viaEnum = rootsOfUnityMoment(d, tuple);
            Rational viaForm = rootsOfUnityMomentClosedForm(d, tuple);
            CHECK(viaEnum == viaForm);
            bool allEqual = true;
            for (int j = 1; j < d; ++j)
                if (tuple[j] != tuple[0]) allEqual = false;
            if (allEqual) CHECK(viaEnum == Rational{1, 1});
            int pos = 0;
            while (pos < d) {
                if (++tuple[pos] <= N) break;
                tuple[pos] = 1;
                ++pos;
            }
            if (pos == d) break;
        }
    }
}

TEST_CASE("rootsOfUnityMoment: enumeration cap") {
    CHECK_THROWS_AS(rootsOfUnityMoment(2, {7, 1}), EnumerationTooLarge);
}

TEST_CASE("gammaLowerBound: constant symbol gives zero, sup is monotone") {
    Grid g = square(64);
    GridFunction b =
        GridFunction::fromFunction(g, [](Point) { return Complex(5.0); });
    GammaSample s1{Cube{{0.3, 0.3, 0}, 0.4, 0}, smoothField(g, 6, 3, 0.2), 0};
    GammaSample s2{Cube{{0.3, 0.3, 0}, 0.4, 0}, smoothField(g, 3, 8, 0.9), 1};
    GammaEstimate zero = gammaLowerBound(b, {4, 4}, {s1});
    CHECK(zero.value <= 1e-10);

    GridFunction blog = GridFunction::fromFunction(g, [](Point p) {
        double r = std::hypot(p[0] - 0.5, p[1] - 0.5);
        return Complex(std::log(r + 1e-9));
    });
    double v1 = gammaLowerBound(blog, {4, 4}, {s1}).value;
    double v2 = gammaLowerBound(blog, {4, 4}, {s1, s2}).value;
    CHECK(v2 >= v1);
    CHECK(v2 > 0);
}

TEST_CASE("containedBallRadius: cross-polytope in the plane") {
    SConvexProblem P;
    P.n = 2;
    P.V = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    double beta = containedBallRadius(P);
    CHECK(beta == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("sconvexRepresent: geometric residual decay and convex weights") {
    SConvexProblem P;
    P.n = 2;
    P.V = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    double beta = containedBallRadius(P);
    std::vector<double> x{0.2, 0.2};
    SConvexRepresentation rep = sconvexRepresent(P, x, 10);
    REQUIRE(rep.terms.size() == 10);
    for (std::size_t k = 0; k < rep.terms.size(); ++k) {
        CHECK(rep.residualNorms[k] <= std::pow(0.5, k + 1) * beta + 1e-12);
        double wsum = 0;
        for (double w : rep.terms[k].weights) {
            CHECK(w >= -1e-12);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(rep.residualNorms.back() <= std::pow(0.5, 10) * beta + 1e-12);

    CHECK_THROWS_AS(sconvexRepresent(P, {0.9, 0.9}, 5), OutsideBall);
}

TEST_CASE("sconvexRepresent: zero vector yields the empty representation") {
    SConvexProblem P;
    P.n = 2;
    P.V = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    SConvexRepresentation rep = sconvexRepresent(P, {0, 0}, 5);
    CHECK(rep.terms.empty());
}

TEST_CASE("jacobianSpanRepresent: product sine target contracts") {
    Grid g = square(128);
    GridFunction f = GridFunction::fromFunction(g, [](Point p) {
        return Complex(std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]));
    });
    SpanRepresentation rep = jacobianSpanRepresent(f, 2.0, 5);
    REQUIRE(rep.rounds.size() >= 1);
    double prev = rep.initialNorm;
    for (const SpanRound& r : rep.rounds) {
        CHECK(r.residualNorm < prev);
        CHECK(r.gradientBudget > 0);
        prev = r.residualNorm;
    }
    CHECK(rep.rounds.back().residualNorm <= 0.2 * rep.initialNorm);
}

TEST_CASE("jacobianSpanRepresent: guards") {
    Grid g = square(32);
    GridFunction one =
        GridFunction::fromFunction(g, [](Point) { return Complex(1.0); });
    CHECK_THROWS_AS(jacobianSpanRepresent(one, 2.0, 3), NotMeanZero);

    // pure Nyquist content is invisible to the solver, so nothing improves
    GridFunction checker(g);
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Index3 idx = g.unflatten(i);
        checker.values[i] = ((idx[0] + idx[1]) % 2 == 0) ? 1.0 : -1.0;
        checker.support[i] = 1;
    }
    CHECK_THROWS_AS(jacobianSpanRepresent(checker, 2.0, 2), StalledResidual);
}
