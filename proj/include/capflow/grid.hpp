// grid.hpp
// Uniform cell-centered rectangle grid shared by all field types.

#ifndef CAPFLOW_GRID_HPP
#define CAPFLOW_GRID_HPP

#include <cstddef>
#include <stdexcept>

namespace capflow {

struct Grid {
    int nx = 0, ny = 0;       // cell counts
    double Lx = 1.0, Ly = 1.0; // domain side lengths

    Grid() = default;
    Grid(int nx_, int ny_, double Lx_, double Ly_) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
        if (nx < 8 || ny < 8) throw std::invalid_argument("Grid: nx, ny must be >= 8");
        if (Lx <= 0.0 || Ly <= 0.0) throw std::invalid_argument("Grid: side lengths must be positive");
    }

    double dx() const { return Lx / nx; }
    double dy() const { return Ly / ny; }
    double cellVolume() const { return dx() * dy(); }
    double volume() const { return Lx * Ly; }
    int cellCount() const { return nx * ny; }

    // row-major cell index
    int id(int i, int j) const { return j * nx + i; }

    // cell-center coordinates
    double xc(int i) const { return (i + 0.5) * dx(); }
    double yc(int j) const { return (j + 0.5) * dy(); }

    bool sameAs(const Grid& o) const {
        return nx == o.nx && ny == o.ny && Lx == o.Lx && Ly == o.Ly;
    }
};

inline void requireSameGrid(const Grid& a, const Grid& b, const char* where) {
    if (!a.sameAs(b)) throw std::invalid_argument(std::string("grid mismatch in ") + where);
}

} // namespace capflow

#endif
