// diagnostics.hpp
// Run-level certification of the inequalities the scheme tracks: the
// Gibbs-Thomson first variation, monotonicity and boundedness of F_h, and
// the sharp dissipation inequalities, plus the JSON report format.

#ifndef CAPFLOW_DIAGNOSTICS_HPP
#define CAPFLOW_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "capflow/ledger.hpp"
#include "capflow/phase.hpp"
#include "capflow/probes.hpp"

namespace capflow {

struct CheckReport {
    std::string name;
    bool pass = false;
    double worst = 0.0;   // worst violation (positive = violated by this much)
    double budget = 0.0;  // slack budget the check was allowed
    std::string detail;
};

// max over probes of |c0 delta-mu(B) - int chi div(w B)| / perimeter;
// restricted to mass-preserving probes when general is false
double gibbsThomsonResidual(const PhaseIndicator& chi, const ScalarField& w,
                            const InterfaceGeometry& geom, double c0,
                            const std::vector<ProbeField>& probes, bool general = true);

// F_h non-increasing between every pair of recorded steps, and bounded by
// E[chi_0]; slack from the ledger's cumulative budget column
CheckReport checkMonotoneF(const EnergyLedger& ledger, double energyInitial);

// Sharp dissipation inequalities between every pair of recorded times:
//   E-side:  E[T] + int(1/2||grad u||^2 + 1/2||grad w||^2) <= E[s] + work + slack
//   v-side:  kin(T) + int nu |Dv|^2 <= kin(s) - int chi v . grad w + slack
//   total:   E + kin non-increasing within slack
std::vector<CheckReport> checkDissipation(const EnergyLedger& ledger, double totalEnergyInitial);

void writeReportJson(const std::string& path, const std::vector<CheckReport>& reports);
bool allPass(const std::vector<CheckReport>& reports);

} // namespace capflow

#endif
