// scenario.hpp
// Run configuration, scenario presets, and the coupled time loop:
// filter -> advect -> minimize -> interpolate -> potentials -> fluid step,
// with an energy-ledger row per step, checkpointing, and deterministic
// restart. Identical configurations produce bit-identical ledgers.

#ifndef CAPFLOW_SCENARIO_HPP
#define CAPFLOW_SCENARIO_HPP

#include <optional>
#include <string>

#include "capflow/diagnostics.hpp"
#include "capflow/fluid.hpp"
#include "capflow/ledger.hpp"
#include "capflow/min_step.hpp"

namespace capflow {

struct RunConfig {
    int nx = 64, ny = 64;
    double Lx = 1.0, Ly = 1.0;
    double h = 1e-3;      // outer time step
    int steps = 50;
    double c0 = 1.0;
    double gamma = 1.5707963267948966;
    double rho1 = 1.0, rho2 = 1.0;
    double nu1 = 1e-2, nu2 = 1e-2;
    double m0Fraction = 0.2;        // used when the scenario does not fix chi_0
    std::string scenario = "stationary-circle";
    RelaxedSolverConfig solver;
    int subtimeSamples = 4;         // geometric spacing toward the step start
    bool paperScaleCoupling = true; // k = h^{-1/8}, beta = 1/k
    double kOverride = 0.0;         // exploration mode when > 0 (logged)
    double betaOverride = -1.0;     // exploration mode when >= 0 (logged)
    double v0Amplitude = 0.0;       // initial velocity = Taylor-Green * amplitude
    std::string viscousBc = "noslip";
    std::string outDir;             // empty: nothing written
    int checkpointCadence = 10;
    unsigned long long seed = 1234; // random probe candidates only
    bool writeImages = false;

    void validate() const;
    std::string toJson() const;
    static RunConfig fromJson(const std::string& text);
    static RunConfig fromJsonFile(const std::string& path);
    unsigned long long hash() const; // over the canonical JSON
    Grid grid() const { return Grid(nx, ny, Lx, Ly); }
    FluidParams fluidParams() const;
    ViscousBc viscousBcEnum() const;
};

// preset configurations named in the CLI; throws on unknown names
RunConfig presetConfig(const std::string& name);

// initial indicator of a configuration's scenario
PhaseIndicator initialIndicator(const RunConfig& cfg);

struct Trajectory {
    EnergyLedger ledger;
    PhaseIndicator chiFinal;
    VelocityField vFinal;
    VelocityField ukFinal;
    double m0 = 0.0;
    double energyInitial = 0.0;  // E[chi_0]
    double totalInitial = 0.0;   // E[chi_0] + kinetic(0)
    double kUsed = 0.0, betaUsed = 0.0;
    std::string outDir;
};

// executes the coupled loop; when resume is true, continues from the latest
// checkpoint in cfg.outDir with bit-identical results
Trajectory run(const RunConfig& cfg, bool resume = false);

} // namespace capflow

#endif
