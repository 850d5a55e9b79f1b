#include "capflow/ledger.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace capflow {

const char* EnergyLedger::header() {
    return "step,t,energy,kinetic,grad_u_sq,grad_w_sq,viscous,work,F_h,mass,"
           "phase_slack,fluid_slack,budget,gap,iterations,threshold,"
           "work_adv,w_quad,beta_dissip,num_dissip,lambda,uk_norm,v_norm";
}

void EnergyLedger::writeCsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EnergyLedger: cannot open " + path);
    out << header() << "\n";
    char buf[64];
    auto put = [&](double v, bool last = false) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << (last ? '\n' : ',');
    };
    for (const LedgerRow& r : rows) {
        out << r.step << ',';
        put(r.t);
        put(r.energy);
        put(r.kinetic);
        put(r.gradUSq);
        put(r.gradWSq);
        put(r.viscous);
        put(r.work);
        put(r.Fh);
        put(r.mass);
        put(r.phaseSlack);
        put(r.fluidSlack);
        put(r.budget);
        put(r.gap);
        out << r.iterations << ',';
        put(r.threshold);
        put(r.workAdv);
        put(r.wQuad);
        put(r.betaDissip);
        put(r.numDissip);
        put(r.lambda);
        put(r.ukNorm);
        put(r.vNorm, true);
    }
}

EnergyLedger EnergyLedger::readCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("EnergyLedger: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("EnergyLedger: empty file " + path);
    EnergyLedger ledger;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != 23) throw std::runtime_error("EnergyLedger: malformed row in " + path);
        LedgerRow r;
        int c = 0;
        r.step = static_cast<int>(vals[c++]);
        r.t = vals[c++];
        r.energy = vals[c++];
        r.kinetic = vals[c++];
        r.gradUSq = vals[c++];
        r.gradWSq = vals[c++];
        r.viscous = vals[c++];
        r.work = vals[c++];
        r.Fh = vals[c++];
        r.mass = vals[c++];
        r.phaseSlack = vals[c++];
        r.fluidSlack = vals[c++];
        r.budget = vals[c++];
        r.gap = vals[c++];
        r.iterations = static_cast<int>(vals[c++]);
        r.threshold = vals[c++];
        r.workAdv = vals[c++];
        r.wQuad = vals[c++];
        r.betaDissip = vals[c++];
        r.numDissip = vals[c++];
        r.lambda = vals[c++];
        r.ukNorm = vals[c++];
        r.vNorm = vals[c++];
        ledger.append(r);
    }
    return ledger;
}

} // namespace capflow
