#include "capflow/diagnostics.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace capflow {

double gibbsThomsonResidual(const PhaseIndicator& chi, const ScalarField& w,
                            const InterfaceGeometry& geom, double c0,
                            const std::vector<ProbeField>& probes, bool general) {
    if (probes.empty()) throw std::invalid_argument("gibbsThomsonResidual: empty probe set");
    if (geom.empty()) return 0.0;
    const double per = std::max(geom.totalWeight, 1e-300);
    double worst = 0.0;
    for (const ProbeField& B : probes) {
        if (!general && !B.solenoidal) continue;
        const double lhs = c0 * firstVariation(geom, B);
        const double rhs = chiDivInner(chi, w, B);
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    return worst / per;
}

CheckReport checkMonotoneF(const EnergyLedger& ledger, double energyInitial) {
    CheckReport rep;
    rep.name = "F_h monotone and bounded by E[chi_0]";
    if (ledger.size() < 1) {
        rep.pass = true;
        rep.detail = "fewer than two rows: trivially monotone";
        return rep;
    }
    double worst = -1e300;
    double budget = 0.0;
    const auto& rows = ledger.rows;
    for (size_t j = 0; j < rows.size(); ++j) {
        budget = std::max(budget, rows[j].budget);
        // bound by the initial energy (F_h(0+) = E[chi_0])
        worst = std::max(worst, rows[j].Fh - energyInitial - rows[j].budget);
        for (size_t i = 0; i < j; ++i)
            worst = std::max(worst, rows[j].Fh - rows[i].Fh - rows[j].budget);
    }
    rep.worst = worst;
    rep.budget = budget;
    rep.pass = worst <= 0.0;
    rep.detail = "worst margin " + std::to_string(worst);
    return rep;
}

std::vector<CheckReport> checkDissipation(const EnergyLedger& ledger, double totalEnergyInitial) {
    std::vector<CheckReport> out;
    const auto& rows = ledger.rows;
    const int n = static_cast<int>(rows.size());
    if (n == 0) return out;
    (void)totalEnergyInitial;

    // the run appends an explicit step-0 row for the initial state, so the
    // per-step columns of row m cover (t_{m-1}, t_m]; cumulative sums below
    std::vector<double> du(n, 0.0), dw(n, 0.0), wad(n, 0.0), vis(n, 0.0), wrk(n, 0.0),
        slackF(n, 0.0);
    for (int m = 1; m < n; ++m) {
        const double h = rows[m].t - rows[m - 1].t;
        du[m] = du[m - 1] + 0.5 * h * rows[m].gradUSq;
        dw[m] = dw[m - 1] + rows[m].wQuad;
        wad[m] = wad[m - 1] + rows[m].workAdv;
        vis[m] = vis[m - 1] + rows[m].viscous;
        wrk[m] = wrk[m - 1] + rows[m].work;
        slackF[m] = slackF[m - 1] + rows[m].fluidSlack;
    }

    CheckReport e, v, tot, mass;
    e.name = "sharp dissipation, phase side";
    v.name = "sharp dissipation, fluid side";
    tot.name = "total energy non-increasing";
    mass.name = "mass column constant";
    double we = -1e300, wv = -1e300, wt = -1e300;
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < j; ++i) {
            const double slackPhase = rows[j].budget;
            const double slackFluid =
                slackF[j] - slackF[i] + 1e-12 * std::max(1.0, rows[i].kinetic);
            const double eSide = rows[j].energy + (du[j] - du[i]) + (dw[j] - dw[i]) -
                                 (rows[i].energy + (wad[j] - wad[i]) + slackPhase);
            const double vSide = rows[j].kinetic + (vis[j] - vis[i]) -
                                 (rows[i].kinetic - (wrk[j] - wrk[i]) + slackFluid);
            const double tSide = rows[j].energy + rows[j].kinetic -
                                 (rows[i].energy + rows[i].kinetic + slackPhase + slackFluid);
            we = std::max(we, eSide);
            wv = std::max(wv, vSide);
            wt = std::max(wt, tSide);
        }
    e.worst = we;
    v.worst = wv;
    tot.worst = wt;
    e.budget = v.budget = tot.budget = rows[n - 1].budget;
    e.pass = we <= 0.0;
    v.pass = wv <= 0.0;
    tot.pass = wt <= 0.0;

    double massDrift = 0.0;
    for (int m = 1; m < n; ++m)
        massDrift = std::max(massDrift, std::fabs(rows[m].mass - rows[0].mass));
    mass.worst = massDrift;
    mass.budget = 1e-12;
    mass.pass = massDrift <= 1e-12;

    out.push_back(e);
    out.push_back(v);
    out.push_back(tot);
    out.push_back(mass);
    return out;
}

void writeReportJson(const std::string& path, const std::vector<CheckReport>& reports) {
    nlohmann::json doc;
    doc["checks"] = nlohmann::json::array();
    bool all = true;
    for (const CheckReport& r : reports) {
        nlohmann::json item;
        item["name"] = r.name;
        item["pass"] = r.pass;
        item["worst_residual"] = r.worst;
        item["slack_budget"] = r.budget;
        item["detail"] = r.detail;
        doc["checks"].push_back(item);
        all = all && r.pass;
    }
    doc["pass"] = all;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("writeReportJson: cannot open " + path);
    out << doc.dump(2) << "\n";
}

bool allPass(const std::vector<CheckReport>& reports) {
    for (const CheckReport& r : reports)
        if (!r.pass) return false;
    return true;
}

} // namespace capflow
