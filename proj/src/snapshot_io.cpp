#include "capflow/snapshot_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace capflow {

namespace {

void writeHeader(std::ostream& out, const Grid& g) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", g.nx, g.ny, g.Lx, g.Ly);
    out << buf;
}

Grid readHeader(std::istream& in, const std::string& path) {
    int nx, ny;
    double Lx, Ly;
    if (!(in >> nx >> ny >> Lx >> Ly))
        throw std::runtime_error("snapshot header unreadable: " + path);
    return Grid(nx, ny, Lx, Ly);
}

void writeValues(std::ostream& out, const double* v, int ncols, int nrows) {
    char buf[32];
    for (int j = 0; j < nrows; ++j) {
        for (int i = 0; i < ncols; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[j * ncols + i]);
            out << buf << (i + 1 < ncols ? ' ' : '\n');
        }
    }
}

void readValues(std::istream& in, double* v, int n, const std::string& path) {
    for (int k = 0; k < n; ++k)
        if (!(in >> v[k])) throw std::runtime_error("snapshot truncated: " + path);
}

std::ofstream openOut(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream openIn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

} // namespace

void writeField(const std::string& path, const ScalarField& f) {
    std::ofstream out = openOut(path);
    writeHeader(out, f.grid());
    writeValues(out, f.data().data(), f.grid().nx, f.grid().ny);
}

ScalarField readField(const std::string& path) {
    std::ifstream in = openIn(path);
    const Grid g = readHeader(in, path);
    ScalarField f(g);
    readValues(in, f.data().data(), f.size(), path);
    return f;
}

void writeIndicator(const std::string& path, const PhaseIndicator& chi) {
    writeField(path, chi.toScalar());
}

PhaseIndicator readIndicator(const std::string& path) {
    const ScalarField f = readField(path);
    PhaseIndicator chi(f.grid());
    for (int k = 0; k < f.size(); ++k) {
        if (f.at(k) != 0.0 && f.at(k) != 1.0)
            throw std::runtime_error("indicator snapshot has values outside {0,1}: " + path);
        chi.at(k) = f.at(k) != 0.0 ? 1 : 0;
    }
    return chi;
}

void writeVelocity(const std::string& basePath, const VelocityField& v) {
    const Grid& g = v.grid();
    {
        std::ofstream out = openOut(basePath + ".u");
        writeHeader(out, g);
        writeValues(out, v.uData().data(), g.nx + 1, g.ny);
    }
    {
        std::ofstream out = openOut(basePath + ".v");
        writeHeader(out, g);
        writeValues(out, v.vData().data(), g.nx, g.ny + 1);
    }
}

VelocityField readVelocity(const std::string& basePath) {
    std::ifstream inu = openIn(basePath + ".u");
    const Grid g = readHeader(inu, basePath + ".u");
    VelocityField v(g);
    readValues(inu, v.uData().data(), (g.nx + 1) * g.ny, basePath + ".u");
    std::ifstream inv = openIn(basePath + ".v");
    const Grid g2 = readHeader(inv, basePath + ".v");
    requireSameGrid(g, g2, "readVelocity");
    readValues(inv, v.vData().data(), g.nx * (g.ny + 1), basePath + ".v");
    return v;
}

void writePGM(const std::string& path, const ScalarField& f, double lo, double hi) {
    std::ofstream out = openOut(path);
    const Grid& g = f.grid();
    out << "P2\n" << g.nx << " " << g.ny << "\n255\n";
    const double span = (hi > lo) ? hi - lo : 1.0;
    for (int j = g.ny - 1; j >= 0; --j) { // image rows top-down
        for (int i = 0; i < g.nx; ++i) {
            int pix = static_cast<int>(std::lround(255.0 * (f(i, j) - lo) / span));
            pix = std::min(255, std::max(0, pix));
            out << pix << (i + 1 < g.nx ? ' ' : '\n');
        }
    }
}

} // namespace capflow
