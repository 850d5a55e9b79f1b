// snapshot_io.hpp
// Field snapshot format shared by all modules: a header line "nx ny Lx Ly"
// followed by row-major ASCII floats. Velocities are written as two files
// (u and v components) with the same header; the staggered sizes
// (nx+1)*ny and nx*(ny+1) follow from the header. Values are printed with
// 17 significant digits so snapshots round-trip bit-exactly.

#ifndef CAPFLOW_SNAPSHOT_IO_HPP
#define CAPFLOW_SNAPSHOT_IO_HPP

#include <string>

#include "capflow/phase.hpp"
#include "capflow/velocity_field.hpp"

namespace capflow {

void writeField(const std::string& path, const ScalarField& f);
ScalarField readField(const std::string& path);

void writeIndicator(const std::string& path, const PhaseIndicator& chi);
PhaseIndicator readIndicator(const std::string& path);

void writeVelocity(const std::string& basePath, const VelocityField& v); // basePath + ".u", ".v"
VelocityField readVelocity(const std::string& basePath);

// 8-bit grayscale image of a field scaled to [lo, hi]
void writePGM(const std::string& path, const ScalarField& f, double lo = 0.0, double hi = 1.0);

} // namespace capflow

#endif
