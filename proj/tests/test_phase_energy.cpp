// Phase-energy suite: analytic flat-interface energies, complement and
// reflection symmetry, mass, disk-perimeter refinement (oracle case:
// circle-perimeter-refinement), and interface geometry.

#include <doctest.h>

#include <cmath>

#include "capflow/phase.hpp"
#include "test_support.hpp"

using namespace capflow;
using namespace capflow::test;

namespace {
std::vector<double> toVec(const PhaseIndicator& chi) {
    std::vector<double> u(chi.size());
    for (int k = 0; k < chi.size(); ++k) u[k] = chi.at(k);
    return u;
}
} // namespace

TEST_CASE("capillary energy: empty phase and flat interfaces are analytic") {
    Grid g(32, 32, 1.0, 1.0);
    TvScheme tv(g);

    CapillaryParams p90{1.0, M_PI / 2};
    PhaseIndicator empty(g);
    CHECK(capillaryEnergy(empty, p90, tv) == 0.0);

    // chi = {x < 1/2}: interface length 1, gamma = pi/2 kills the boundary term
    PhaseIndicator half = halfPlaneX(g, 0.5);
    CHECK(capillaryEnergy(half, p90, tv) == doctest::Approx(1.0).epsilon(1e-14));

    // cos gamma = 1/2: boundary trace = left edge (1) + two half edges (1/2 each)
    CapillaryParams p60{1.0, std::acos(0.5)};
    CHECK(capillaryEnergy(half, p60, tv) == doctest::Approx(2.0).epsilon(1e-12));

    // chi = 1 everywhere: no interior interface, full boundary trace
    PhaseIndicator full(g);
    for (int k = 0; k < full.size(); ++k) full.at(k) = 1;
    CHECK(capillaryEnergy(full, p90, tv) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(capillaryEnergy(full, p60, tv) == doctest::Approx(0.5 * 4.0).epsilon(1e-12));
}

TEST_CASE("mass is the exact cell-volume-weighted count") {
    Grid g(64, 64, 1.0, 1.0);
    PhaseIndicator full(g);
    for (int k = 0; k < full.size(); ++k) full.at(k) = 1;
    CHECK(full.mass() == doctest::Approx(1.0).epsilon(1e-15));

    PhaseIndicator half = halfPlaneX(g, 0.5);
    CHECK(half.mass() == doctest::Approx(0.5).epsilon(1e-15));

    PhaseIndicator r(g);
    Rng rng(5);
    int placed = 0;
    while (placed < 1000) {
        const int k = rng.index(r.size());
        if (!r.at(k)) {
            r.at(k) = 1;
            ++placed;
        }
    }
    CHECK(r.mass() == doctest::Approx(1000.0 / 4096.0).epsilon(1e-15));
}

TEST_CASE("complement symmetry at cos gamma = 0 and reflection invariance") {
    Grid g(32, 32, 1.0, 1.0);
    TvScheme tv(g);
    CapillaryParams p90{1.3, M_PI / 2};

    PhaseIndicator chi = disk(g, 0.4, 0.55, 0.21);
    PhaseIndicator comp(g);
    for (int k = 0; k < chi.size(); ++k) comp.at(k) = 1 - chi.at(k);
    CHECK(capillaryEnergy(chi, p90, tv) ==
          doctest::Approx(capillaryEnergy(comp, p90, tv)).epsilon(1e-12));

    PhaseIndicator mirrored(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) mirrored(i, j) = chi(g.nx - 1 - i, j);
    CHECK(capillaryEnergy(chi, p90, tv) ==
          doctest::Approx(capillaryEnergy(mirrored, p90, tv)).epsilon(1e-12));
    CapillaryParams p60{1.0, std::acos(0.5)};
    CHECK(capillaryEnergy(chi, p60, tv) ==
          doctest::Approx(capillaryEnergy(mirrored, p60, tv)).epsilon(1e-12));
}

TEST_CASE("disk perimeter converges to 2 pi r at first order or better") {
    const double r = 0.25;
    const double exact = 2.0 * M_PI * r;
    double errs[3];
    int idx = 0;
    for (int n : {32, 64, 128}) {
        Grid g(n, n, 1.0, 1.0);
        TvScheme tv(g);
        PhaseIndicator chi = disk(g, 0.5, 0.5, r);
        const double tvVal = tv.tvInterior(toVec(chi));
        errs[idx++] = std::fabs(tvVal - exact);
    }
    // first order: halving the spacing should at least halve the error (0.65
    // leaves room for the staircase wobble)
    CHECK(errs[1] <= 0.65 * errs[0]);
    CHECK(errs[2] <= 0.65 * errs[1]);
    CHECK(errs[2] / exact <= 0.02);
}

TEST_CASE("interface geometry: empty, flat normals, weight sum, disk normals") {
    Grid g(32, 32, 1.0, 1.0);
    TvScheme tv(g);

    PhaseIndicator empty(g);
    CHECK(interfaceGeometry(empty, tv).empty());

    PhaseIndicator half = halfPlaneX(g, 0.5);
    InterfaceGeometry geom = interfaceGeometry(half, tv);
    CHECK_FALSE(geom.empty());
    for (const InterfaceCell& c : geom.cells) {
        CHECK(c.nx == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(std::fabs(c.ny) <= 1e-6);
        CHECK(std::hypot(c.nx, c.ny) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(geom.totalWeight == doctest::Approx(tv.tvInterior(toVec(half))).epsilon(1e-10));

    Grid gf(128, 128, 1.0, 1.0);
    TvScheme tvf(gf);
    PhaseIndicator circ = disk(gf, 0.5, 0.5, 0.25);
    InterfaceGeometry dg = interfaceGeometry(circ, tvf);
    CHECK(dg.totalWeight == doctest::Approx(tvf.tvInterior(toVec(circ))).epsilon(1e-10));
    double worstDeg = 0.0;
    for (const InterfaceCell& c : dg.cells) {
        const double rx = c.x - 0.5, ry = c.y - 0.5;
        const double rn = std::hypot(rx, ry);
        if (rn < 1e-12) continue;
        // analytic normal pointing into the phase (toward the center)
        const double dot = (-rx / rn) * c.nx + (-ry / rn) * c.ny;
        const double ang = std::acos(std::min(1.0, std::max(-1.0, dot))) * 180.0 / M_PI;
        worstDeg = std::max(worstDeg, ang);
    }
    CHECK(worstDeg <= 2.0);
}
