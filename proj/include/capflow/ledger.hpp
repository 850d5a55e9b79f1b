// ledger.hpp
// Per-step energy ledger of a run. The leading columns follow the order of
// the quantities the dissipation checks consume; solver telemetry is
// appended at the end. Values are written with 17 significant digits so
// repeated runs can be compared bit for bit.

#ifndef CAPFLOW_LEDGER_HPP
#define CAPFLOW_LEDGER_HPP

#include <string>
#include <vector>

namespace capflow {

struct LedgerRow {
    int step = 0;
    double t = 0.0;
    double energy = 0.0;      // E[chi_n]
    double kinetic = 0.0;     // 1/2 int rho |v|^2
    double gradUSq = 0.0;     // ||grad u||^2 of the kinetic potential
    double gradWSq = 0.0;     // ||grad w0||^2 at the step's final sub-time
    double viscous = 0.0;     // int nu |Dv|^2 dt over the step (time-integrated)
    double work = 0.0;        // int chi v . grad w dt over the step
    double Fh = 0.0;          // E + fidelity - accumulated advective work
    double mass = 0.0;
    double phaseSlack = 0.0;  // closure of the phase-side telescoping
    double fluidSlack = 0.0;  // closure of the fluid energy identity
    double budget = 0.0;      // cumulative slack budget
    double gap = 0.0;         // duality gaps accumulated this step
    int iterations = 0;       // primal-dual iterations this step
    double threshold = 0.0;   // threshold level of the accepted minimizer
    // additional telemetry
    double workAdv = 0.0;     // advective work increment (the F_h integrand)
    double wQuad = 0.0;       // int 1/2 ||grad w||^2 dt over the step's sub-times
    double betaDissip = 0.0;  // int beta |A v|^2 dt
    double numDissip = 0.0;   // numerical dissipation of the momentum step
    double lambda = 0.0;      // curvature-potential multiplier
    double ukNorm = 0.0;      // L2 norm of the filtered advecting field
    double vNorm = 0.0;       // L2 norm of the fluid velocity
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;

    void append(const LedgerRow& r) { rows.push_back(r); }
    bool empty() const { return rows.empty(); }
    int size() const { return static_cast<int>(rows.size()); }

    void writeCsv(const std::string& path) const;
    static EnergyLedger readCsv(const std::string& path);
    static const char* header();
};

} // namespace capflow

#endif
