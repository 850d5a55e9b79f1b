// Flow-map suite: identity map, self-refinement oracle for the RK4
// characteristics (oracle case: flowmap-fine-substep), Gronwall bound on the
// map gradient, measure preservation of the pullback, the L1 displacement
// bound, and the H^-1 difference-quotient rate.

#include <doctest.h>

#include <cmath>

#include "capflow/flow_map.hpp"
#include "test_support.hpp"

using namespace capflow;
using namespace capflow::test;

TEST_CASE("v = 0 gives the identity map and exact pullback") {
    Grid g(32, 32, 1.0, 1.0);
    VelocityField v(g);
    FlowMapSample map = integrateFlow(v, 0.7);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            CHECK(map.footX[g.id(i, j)] == g.xc(i));
            CHECK(map.footY[g.id(i, j)] == g.yc(j));
        }
    CHECK(map.maxClampDistance == 0.0);

    PhaseIndicator chi = disk(g, 0.5, 0.5, 0.25);
    ScalarField back = pullback(chi, map);
    for (int k = 0; k < back.size(); ++k) CHECK(back.at(k) == static_cast<double>(chi.at(k)));
}

TEST_CASE("NaN velocity is a hard error") {
    Grid g(16, 16, 1.0, 1.0);
    VelocityField v(g);
    v.u(3, 3) = std::nan("");
    CHECK_THROWS_AS((void)integrateFlow(v, 0.01), std::invalid_argument);
}

TEST_CASE("Taylor-Green feet match a 100x finer-substep oracle to 1e-8") {
    Grid g(64, 64, 1.0, 1.0);
    VelocityField v = taylorGreen(g);
    const double s = 0.01;
    FlowMapSample base = integrateFlow(v, s);
    FlowMapSample fine = integrateFlow(v, s, base.substeps * 100);
    double err = 0.0;
    for (int k = 0; k < g.cellCount(); ++k)
        err = std::max(err, std::hypot(base.footX[k] - fine.footX[k], base.footY[k] - fine.footY[k]));
    CHECK(err <= 1e-8);
    CHECK(base.maxClampDistance <= 1e-8 * std::min(g.dx(), g.dy()));
}

TEST_CASE("Gronwall bound on the map gradient is never violated") {
    Grid g(64, 64, 1.0, 1.0);
    VelocityField v = taylorGreen(g, 0.4);
    const double c1 = velocityC1Norm(v);
    for (double s : {0.002, 0.01, 0.02}) {
        FlowMapSample fwd = integrateFlow(v, -s); // forward map X_s
        CHECK(mapGradientMaxNorm(fwd) <= std::sqrt(2.0) * std::exp(s * c1));
    }
}

TEST_CASE("group property: backward then forward returns to cell centers") {
    Grid g(64, 64, 1.0, 1.0);
    VelocityField v = taylorGreen(g, 0.5);
    const double s = 0.01;
    FlowMapSample back = integrateFlow(v, s);
    // integrate each foot forward again by composing maps on the sample points
    FlowMapSample fwd = integrateFlow(v, -s);
    // X_s o X_{-s} ~ id: evaluate the forward feet at the backward feet by
    // round-tripping the coordinate fields through the pullback interpolation
    ScalarField fx(g), fy(g);
    for (int k = 0; k < g.cellCount(); ++k) {
        fx.at(k) = fwd.footX[k];
        fy.at(k) = fwd.footY[k];
    }
    ScalarField rx = composeWithMap(fx, back);
    ScalarField ry = composeWithMap(fy, back);
    double err = 0.0;
    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 2; ++i)
            err = std::max(err, std::hypot(rx(i, j) - g.xc(i), ry(i, j) - g.yc(j)));
    // bilinear round-trip dominates the integrator error
    CHECK(err <= 2e-4);
}

TEST_CASE("pullback stays in [0,1] and preserves mass within 1e-3 m0") {
    Grid g(64, 64, 1.0, 1.0);
    VelocityField v = taylorGreen(g);
    PhaseIndicator chi = disk(g, 0.5, 0.5, 0.25);
    const double m0 = chi.mass();
    FlowMapSample map = integrateFlow(v, 0.01);
    ScalarField adv = pullback(chi, map);
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < adv.size(); ++k) {
        lo = std::min(lo, adv.at(k));
        hi = std::max(hi, adv.at(k));
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    CHECK(std::fabs(adv.integral() - m0) <= 1e-3 * m0);
}

TEST_CASE("pullback mass error shrinks under refinement") {
    VelocityField v32(Grid(32, 32, 1.0, 1.0));
    double errs[2];
    int idx = 0;
    for (int n : {32, 64}) {
        Grid g(n, n, 1.0, 1.0);
        VelocityField v = taylorGreen(g);
        PhaseIndicator chi = disk(g, 0.5, 0.5, 0.25);
        FlowMapSample map = integrateFlow(v, 0.01);
        ScalarField adv = pullback(chi, map);
        errs[idx++] = std::fabs(adv.integral() - chi.mass());
    }
    CHECK(errs[1] <= 0.75 * errs[0]);
}

TEST_CASE("L1 displacement bound holds with 5 percent slack") {
    Grid g(64, 64, 1.0, 1.0);
    VelocityField v = taylorGreen(g, 0.5);
    PhaseIndicator chi = disk(g, 0.5, 0.5, 0.25);
    TvScheme tv(g);
    std::vector<double> u(chi.size());
    for (int k = 0; k < chi.size(); ++k) u[k] = chi.at(k);
    const double tvChi = tv.tvInterior(u);
    const double c0 = velocityC0Norm(v), c1 = velocityC1Norm(v);
    for (double s : {0.005, 0.01, 0.02}) {
        FlowMapSample map = integrateFlow(v, s);
        ScalarField adv = pullback(chi, map);
        double l1 = 0.0;
        for (int k = 0; k < adv.size(); ++k) l1 += std::fabs(chi.at(k) - adv.at(k));
        l1 *= g.cellVolume();
        const double integral = (std::exp(s * c1) - 1.0) / c1;
        CHECK(l1 <= 1.05 * std::sqrt(2.0) * integral * tvChi * c0);
    }
}

TEST_CASE("composition difference rate: zero velocity, Cauchy halvings, H1c bound") {
    Grid g(128, 128, 1.0, 1.0);
    NeumannPoisson poisson(g);
    // off-center so that v . grad chi does not vanish at the vortex center
    PhaseIndicator chi = disk(g, 0.32, 0.45, 0.2);

    VelocityField zero(g);
    DifferenceRate r0 = compositionDifferenceRate(chi, zero, 0.01, poisson);
    CHECK(r0.value == 0.0);
    CHECK_FALSE(r0.massDriftFlagged);

    VelocityField v = taylorGreen(g);
    double vals[3];
    int idx = 0;
    for (double s : {0.04, 0.02, 0.01}) {
        DifferenceRate r = compositionDifferenceRate(chi, v, s, poisson);
        CHECK(r.value <= 1.05 * velocityC0Norm(v));
        vals[idx++] = r.value;
    }
    CHECK(std::fabs(vals[1] - vals[0]) <= 0.10 * vals[0]);
    CHECK(std::fabs(vals[2] - vals[1]) <= 0.10 * vals[1]);
}
