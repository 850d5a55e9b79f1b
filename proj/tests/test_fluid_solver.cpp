// Fluid suite: cutoff branch table and contraction, exact adjointness of the
// operator building blocks, the velocity filter (stationary oracle and
// smoothing), Taylor-Green viscous decay (oracle case: taylor-green-decay),
// the per-step energy identity, and density-interpolant bounds.

#include <doctest.h>

#include <cmath>

#include "capflow/fluid.hpp"
#include "capflow/flow_map.hpp"
#include "capflow/potentials.hpp"
#include "test_support.hpp"

using namespace capflow;
using namespace capflow::test;

namespace {

FluidParams plainParams(double k = 10.0, double beta = 0.0) {
    FluidParams p;
    p.rho1 = p.rho2 = 1.0;
    p.nu1 = p.nu2 = 1e-2;
    p.k = k;
    p.beta = beta;
    p.paperScaleCoupling = false;
    return p;
}

} // namespace

TEST_CASE("cutoff branch table and contraction") {
    Grid g(16, 16, 1.0, 1.0);
    VelocityField v(g);
    v.u(3, 3) = 3.0;
    v.u(4, 3) = -1.0;
    v.u(5, 3) = 0.5;
    VelocityField c = cutoff(v, 2.0);
    CHECK(c.u(3, 3) == 2.0);
    CHECK(c.u(4, 3) == -1.0);
    CHECK(c.u(5, 3) == 0.5);

    for (uint64_t seed = 1; seed <= 4; ++seed) {
        VelocityField r = randomDivFree(g, seed);
        r *= 3.0;
        CHECK(cutoff(r, 1.3).l2Norm() <= r.l2Norm() + 1e-14);
    }
}

TEST_CASE("paper-coupled parameters: k = h^(-1/8), beta = 1/k") {
    FluidParams p = FluidParams::coupled(1e-4, 1.0, 1.0, 1e-2, 1e-2);
    CHECK(p.k == doctest::Approx(3.16227766016838).epsilon(1e-12));
    CHECK(p.beta == doctest::Approx(0.316227766016838).epsilon(1e-12));
}

TEST_CASE("advection gather/scatter are exact adjoints; skew form vanishes") {
    Grid g(24, 20, 1.0, 1.2);
    for (ViscousBc bc : {ViscousBc::NoSlip, ViscousBc::FreeSlip}) {
        FluidSolver fs(g, plainParams(), bc);
        VelocityField vAdv = randomDivFree(g, 3);
        VelocityField w = randomDivFree(g, 4);
        VelocityField xi = randomDivFree(g, 5);
        VelocityField coef(g);
        Rng rng(9);
        for (double& x : coef.uData()) x = 0.5 + rng.uniform();
        for (double& x : coef.vData()) x = 0.5 + rng.uniform();

        const double a = faceInner(fs.advect(vAdv, w, coef), xi);
        const double b = faceInner(w, fs.advectTranspose(vAdv, xi, coef));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));

        // skew(w,w) = 0 up to round-off
        VelocityField s1 = fs.advect(vAdv, w, coef);
        VelocityField s2 = fs.advectTranspose(vAdv, w, coef);
        const double skew = 0.5 * (faceInner(s1, w) - faceInner(s2, w));
        CHECK(std::fabs(skew) <= 1e-12 * std::max(1.0, std::fabs(faceInner(s1, w))));
    }
}

TEST_CASE("viscous operator is symmetric and reproduces its dissipation") {
    Grid g(20, 24, 1.0, 1.0);
    for (ViscousBc bc : {ViscousBc::NoSlip, ViscousBc::FreeSlip}) {
        FluidSolver fs(g, plainParams(), bc);
        ScalarField nu(g);
        Rng rng(11);
        for (double& x : nu.data()) x = 0.5 + rng.uniform();
        VelocityField w = randomDivFree(g, 6);
        VelocityField xi = randomDivFree(g, 7);
        const double a = faceInner(fs.applyViscous(w, nu), xi);
        const double b = faceInner(w, fs.applyViscous(xi, nu));
        CHECK(a == doctest::Approx(b).epsilon(1e-11));
        double dis = 0.0;
        VelocityField vw = fs.applyViscous(w, nu, &dis);
        CHECK(faceInner(vw, w) == doctest::Approx(dis).epsilon(1e-11));
        CHECK(dis > 0.0);
    }
}

TEST_CASE("Stokes operator is symmetric positive on divergence-free fields") {
    Grid g(20, 20, 1.0, 1.0);
    FluidSolver fs(g, plainParams());
    VelocityField w = randomDivFree(g, 8);
    VelocityField xi = randomDivFree(g, 9);
    const double a = faceInner(fs.applyA(w), xi);
    const double b = faceInner(w, fs.applyA(xi));
    CHECK(a == doctest::Approx(b).epsilon(1e-11));
    CHECK(faceInner(fs.applyA(w), w) > 0.0);
}

TEST_CASE("filter: zero input, stationary limit, smoothing, L2 control") {
    Grid g(32, 32, 1.0, 1.0);
    FluidParams par = plainParams(2.0);
    FluidSolver fs(g, par);

    VelocityField zero(g);
    FilterResult fz = fs.filterStep(zero, zero, 1e-2);
    CHECK(fz.u.maxAbs() <= 1e-14);

    // constant-in-time v: many implicit steps approach the stationary solution
    VelocityField v = taylorGreen(g, 0.4);
    {
        MacProjector proj(g);
        proj.project(v);
    }
    VelocityField u(g);
    double cumU = 0.0, cumV = 0.0;
    const double h = 0.05;
    for (int m = 0; m < 400; ++m) {
        FilterResult fr = fs.filterStep(u, v, h);
        u = fr.u;
        cumU += h * u.l2NormSq();
        cumV += h * v.l2NormSq();
        CHECK(std::sqrt(cumU) <= std::sqrt(cumV) * (1.0 + 1e-8));
    }
    CHECK(fs.stationaryResidual(u, v) <= 1e-6);

    FilterResult stat = fs.filterStationary(v);
    CHECK(stat.stationaryResidual <= 1e-8);
    CHECK(maxDivergence(stat.u) <= 1e-9);

    // smoothing: near-checkerboard input loses gradient energy
    VelocityField rough = randomDivFree(g, 21);
    FilterResult fr = fs.filterStationary(rough);
    CHECK(fr.u.maxGradAbs() < rough.maxGradAbs());
    CHECK(fr.u.l2Norm() <= rough.l2Norm());
}

TEST_CASE("momentum: zero state with zero forcing stays zero") {
    Grid g(32, 32, 1.0, 1.0);
    FluidParams par = plainParams(2.0, 0.3);
    FluidSolver fs(g, par);
    PhaseIndicator chi = disk(g, 0.5, 0.5, 0.25);
    NeumannPoisson poisson(g);
    FluidState s{VelocityField(g), densityOf(chi, par), 0.0};
    MeanZeroField uKin(g);
    ScalarField w(g); // constant zero curvature potential
    NsStepResult r = fs.nsStep(s, chi, chi, uKin, w, 1e-3);
    CHECK(r.state.v.maxAbs() <= 1e-13);
    CHECK(r.work == 0.0);
}

TEST_CASE("Taylor-Green decay matches the analytic viscous rate within 10 percent") {
    Grid g(128, 128, 1.0, 1.0);
    FluidParams par = plainParams(50.0, 0.0);
    FluidSolver fs(g, par, ViscousBc::FreeSlip);
    StreamSolver stream(g);

    VelocityField v0 = taylorGreen(g, 0.5);
    VelocityField v = stream.applyR(stream.streamOf(v0)); // exactly divergence-free
    PhaseIndicator chi(g);                                // no phase: matched densities
    ScalarField rho(g, 1.0);
    MeanZeroField uKin(g);
    ScalarField w(g);

    FluidState s{v, rho, 0.0};
    const double h = 1e-3;
    const double ke0 = kineticEnergy(rho, s.v);
    double slackTotal = 0.0;
    const int steps = 20;
    for (int m = 0; m < steps; ++m) {
        NsStepResult r = fs.nsStep(s, chi, chi, uKin, w, h);
        s = r.state;
        slackTotal += r.energySlack;
    }
    const double keT = kineticEnergy(rho, s.v);
    CHECK(keT < ke0);
    const double rate = std::log(ke0 / keT) / (steps * h);
    // the weak form carries nu Dv : Dxi, under which the kinetic energy of the
    // first box mode decays as exp(-2 nu pi^2 t)
    const double analytic = 2.0 * M_PI * M_PI * par.nu1;
    CHECK(rate == doctest::Approx(analytic).epsilon(0.10));
    CHECK(slackTotal <= 1e-6 * ke0);
}

TEST_CASE("forcing from rest: kinetic energy equals the work within slack") {
    Grid g(64, 64, 1.0, 1.0);
    FluidParams par = plainParams(5.0, 0.2);
    FluidSolver fs(g, par);
    NeumannPoisson poisson(g);
    TvScheme tv(g);

    PhaseIndicator chi = disk(g, 0.5, 0.5, 0.2);
    // synthetic curvature potential: a bump supported near the interface
    ScalarField w(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double r = std::hypot(g.xc(i) - 0.5, g.yc(j) - 0.5);
            w(i, j) = std::exp(-60.0 * (r - 0.2) * (r - 0.2));
        }
    FluidState s{VelocityField(g), densityOf(chi, par), 0.0};
    MeanZeroField uKin(g);
    NsStepResult r = fs.nsStep(s, chi, chi, uKin, w, 1e-3);
    const double ke1 = kineticEnergy(r.state.rho, r.state.v);
    CHECK(ke1 > 0.0);
    // ke1 - 0 + numD + h(visc+beta) = -work; the closure is the recorded slack
    CHECK(r.energySlack <= 1e-10 * std::max(1.0, ke1));
}

TEST_CASE("variable-density step keeps rho within bounds and obeys the identity") {
    Grid g(48, 48, 1.0, 1.0);
    FluidParams par = plainParams(5.0, 0.1);
    par.rho1 = 2.0;
    par.rho2 = 1.0;
    par.nu1 = 3e-2;
    par.nu2 = 1e-2;
    FluidSolver fs(g, par);
    NeumannPoisson poisson(g);

    PhaseIndicator chiPrev = disk(g, 0.5, 0.5, 0.2);
    PhaseIndicator chiNew = disk(g, 0.51, 0.5, 0.2); // slightly advected phase
    // mass-consistent kinetic potential from the indicator difference
    ScalarField adv = chiPrev.toScalar();
    const double dm = (chiNew.mass() - chiPrev.mass()) / g.volume();
    for (double& x : adv.data()) x += dm; // equalize masses for the potential
    MeanZeroField uKin = kineticPotential(chiNew, adv, 1e-3, poisson);

    VelocityField v0 = taylorGreen(g, 0.3);
    StreamSolver stream(g);
    v0 = stream.applyR(stream.streamOf(v0));
    FluidState s{v0, densityOf(chiPrev, par), 0.0};
    ScalarField w(g);
    NsStepResult r = fs.nsStep(s, chiPrev, chiNew, uKin, w, 1e-3);
    for (double x : r.state.rho.data()) {
        CHECK(x >= par.rhoMin() - 1e-14);
        CHECK(x <= par.rhoMax() + 1e-14);
    }
    CHECK(r.energySlack <= 1e-9 * kineticEnergy(s.rho, s.v));
}

TEST_CASE("density interpolant endpoints and constancy") {
    Grid g(16, 16, 1.0, 1.0);
    FluidParams par = plainParams();
    par.rho1 = 3.0;
    par.rho2 = 0.5;
    PhaseIndicator a = disk(g, 0.4, 0.5, 0.2);
    PhaseIndicator b = disk(g, 0.6, 0.5, 0.2);
    ScalarField r0 = densityInterpolant(a, b, 0.0, par);
    ScalarField r1 = densityInterpolant(a, b, 1.0, par);
    for (int k = 0; k < r0.size(); ++k) {
        CHECK(r0.at(k) == (a.at(k) ? par.rho1 : par.rho2));
        CHECK(r1.at(k) == (b.at(k) ? par.rho1 : par.rho2));
    }
    ScalarField rc = densityInterpolant(a, a, 0.37, par);
    for (int k = 0; k < rc.size(); ++k) CHECK(rc.at(k) == (a.at(k) ? par.rho1 : par.rho2));
}
