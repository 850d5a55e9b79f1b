#include "capflow/probes.hpp"

#include <cmath>
#include <stdexcept>

namespace capflow {

namespace {

// centered interior, one-sided at the walls
void gradAtCells(const ScalarField& f, ScalarField& fx, ScalarField& fy) {
    const Grid& g = f.grid();
    fx = ScalarField(g);
    fy = ScalarField(g);
    const double dx = g.dx(), dy = g.dy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i == 0)
                fx(i, j) = (f(1, j) - f(0, j)) / dx;
            else if (i == g.nx - 1)
                fx(i, j) = (f(i, j) - f(i - 1, j)) / dx;
            else
                fx(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2 * dx);
            if (j == 0)
                fy(i, j) = (f(i, 1) - f(i, 0)) / dy;
            else if (j == g.ny - 1)
                fy(i, j) = (f(i, j) - f(i, j - 1)) / dy;
            else
                fy(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2 * dy);
        }
}

} // namespace

std::vector<ProbeField> probeBasis(const Grid& g) {
    std::vector<ProbeField> out;
    const double pi = M_PI;

    // rotated gradients of sin(k pi x/Lx) sin(l pi y/Ly): divergence-free and
    // tangent since the stream function vanishes on the boundary
    for (int k = 1; k <= 2; ++k)
        for (int l = 1; l <= 2; ++l) {
            ProbeField b{ScalarField(g), ScalarField(g), true,
                         "rotgrad-" + std::to_string(k) + std::to_string(l)};
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.xc(i), y = g.yc(j);
                    b.bx(i, j) = (l * pi / g.Ly) * std::sin(k * pi * x / g.Lx) *
                                 std::cos(l * pi * y / g.Ly);
                    b.by(i, j) = -(k * pi / g.Lx) * std::cos(k * pi * x / g.Lx) *
                                 std::sin(l * pi * y / g.Ly);
                }
            out.push_back(std::move(b));
        }
    {
        // radial bump stream: rot-grad of exp(-|x-c|^2 / 2s^2)
        ProbeField b{ScalarField(g), ScalarField(g), true, "rotgrad-bump"};
        const double cx = 0.5 * g.Lx, cy = 0.5 * g.Ly, s2 = 0.02 * g.Lx * g.Ly;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.xc(i) - cx, y = g.yc(j) - cy;
                const double e = std::exp(-(x * x + y * y) / (2 * s2));
                b.bx(i, j) = -(y / s2) * e;
                b.by(i, j) = (x / s2) * e;
            }
        out.push_back(std::move(b));
    }
    {
        // rot-grad of psi = sin^2(pi x/Lx) sin(pi y/Ly)
        ProbeField b{ScalarField(g), ScalarField(g), true, "rotgrad-21s"};
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.xc(i), y = g.yc(j);
                const double sx = std::sin(pi * x / g.Lx);
                b.bx(i, j) = (pi / g.Ly) * sx * sx * std::cos(pi * y / g.Ly);
                b.by(i, j) = -(2 * pi / g.Lx) * sx * std::cos(pi * x / g.Lx) *
                             std::sin(pi * y / g.Ly);
            }
        out.push_back(std::move(b));
    }

    // polynomial tangent fields, generally not mass preserving
    struct Poly {
        const char* name;
        double (*px)(double x, double y, double Lx, double Ly);
        double (*py)(double x, double y, double Lx, double Ly);
    };
    static const Poly polys[6] = {
        {"poly-x0", [](double x, double, double Lx, double) { return x * (Lx - x); },
         [](double, double, double, double) { return 0.0; }},
        {"poly-0y", [](double, double, double, double) { return 0.0; },
         [](double, double y, double, double Ly) { return y * (Ly - y); }},
        {"dilate-x", [](double x, double, double Lx, double) { return std::sin(2 * M_PI * x / Lx); },
         [](double, double, double, double) { return 0.0; }},
        {"poly-xcos", [](double x, double y, double Lx, double Ly) {
             return x * (Lx - x) * std::cos(M_PI * y / Ly);
         },
         [](double, double, double, double) { return 0.0; }},
        {"poly-ycos", [](double, double, double, double) { return 0.0; },
         [](double x, double y, double Lx, double Ly) {
             return y * (Ly - y) * std::cos(M_PI * x / Lx);
         }},
        {"dilate-y", [](double, double, double, double) { return 0.0; },
         [](double, double y, double, double Ly) { return std::sin(2 * M_PI * y / Ly); }},
    };
    for (const Poly& q : polys) {
        ProbeField b{ScalarField(g), ScalarField(g), false, q.name};
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                b.bx(i, j) = q.px(g.xc(i), g.yc(j), g.Lx, g.Ly);
                b.by(i, j) = q.py(g.xc(i), g.yc(j), g.Lx, g.Ly);
            }
        out.push_back(std::move(b));
    }
    if (out.size() != 12) throw std::logic_error("probeBasis: expected 12 fields");
    return out;
}

ScalarField probeDivergence(const ProbeField& B) {
    ScalarField bxx, bxy, byx, byy;
    gradAtCells(B.bx, bxx, bxy);
    gradAtCells(B.by, byx, byy);
    ScalarField d(B.bx.grid());
    for (int k = 0; k < d.size(); ++k) d.at(k) = bxx.at(k) + byy.at(k);
    return d;
}

double chiDivInner(const PhaseIndicator& chi, const ProbeField& B) {
    const ScalarField d = probeDivergence(B);
    double s = 0.0;
    for (int k = 0; k < d.size(); ++k)
        if (chi.at(k)) s += d.at(k);
    return s * chi.grid().cellVolume();
}

double chiDivInner(const PhaseIndicator& chi, const ScalarField& w, const ProbeField& B) {
    const Grid& g = chi.grid();
    requireSameGrid(g, w.grid(), "chiDivInner");
    ProbeField wb{ScalarField(g), ScalarField(g), false, "wB"};
    for (int k = 0; k < w.size(); ++k) {
        wb.bx.at(k) = w.at(k) * B.bx.at(k);
        wb.by.at(k) = w.at(k) * B.by.at(k);
    }
    return chiDivInner(chi, wb);
}

double firstVariation(const InterfaceGeometry& geom, const ProbeField& B) {
    if (geom.empty()) return 0.0;
    ScalarField bxx, bxy, byx, byy;
    gradAtCells(B.bx, bxx, bxy);
    gradAtCells(B.by, byx, byy);
    const Grid& g = B.bx.grid();
    double s = 0.0;
    for (const InterfaceCell& c : geom.cells) {
        const int id = g.id(c.i, c.j);
        const double tr = bxx.at(id) + byy.at(id);
        // n^T (grad B) n with (grad B)_{ab} = d_b B_a
        const double nn = c.nx * (bxx.at(id) * c.nx + bxy.at(id) * c.ny) +
                          c.ny * (byx.at(id) * c.nx + byy.at(id) * c.ny);
        s += c.weight * (tr - nn);
    }
    return s;
}

ProbeField correctToMassPreserving(const ProbeField& B, const PhaseIndicator& chi,
                                   const ProbeField& ref) {
    const double dRef = chiDivInner(chi, ref);
    if (std::fabs(dRef) < 1e-14)
        throw std::invalid_argument("correctToMassPreserving: reference probe is mass-preserving");
    const double a = chiDivInner(chi, B) / dRef;
    ProbeField out{B.bx, B.by, false, B.name + "-masscorr"};
    for (int k = 0; k < out.bx.size(); ++k) {
        out.bx.at(k) -= a * ref.bx.at(k);
        out.by.at(k) -= a * ref.by.at(k);
    }
    return out;
}

} // namespace capflow
