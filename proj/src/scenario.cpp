#include "capflow/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "capflow/flow_map.hpp"
#include "capflow/potentials.hpp"
#include "capflow/snapshot_io.hpp"

namespace capflow {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    (void)grid();
    if (h <= 0.0 || steps < 0) throw std::invalid_argument("RunConfig: h > 0, steps >= 0 required");
    if (c0 <= 0.0) throw std::invalid_argument("RunConfig: c0 must be positive");
    if (!(gamma > 0.0 && gamma <= M_PI / 2 + 1e-12))
        throw std::invalid_argument("RunConfig: gamma must lie in (0, pi/2]");
    if (rho1 <= 0 || rho2 <= 0 || nu1 <= 0 || nu2 <= 0)
        throw std::invalid_argument("RunConfig: densities and viscosities must be positive");
    if (!(m0Fraction > 0.0 && m0Fraction < 1.0))
        throw std::invalid_argument("RunConfig: m0_fraction must lie in (0,1)");
    if (subtimeSamples < 1) throw std::invalid_argument("RunConfig: subtime sample count >= 1");
    if (viscousBc != "noslip" && viscousBc != "freeslip")
        throw std::invalid_argument("RunConfig: viscous_bc must be noslip or freeslip");
}

ViscousBc RunConfig::viscousBcEnum() const {
    return viscousBc == "freeslip" ? ViscousBc::FreeSlip : ViscousBc::NoSlip;
}

FluidParams RunConfig::fluidParams() const {
    FluidParams par = FluidParams::coupled(h, rho1, rho2, nu1, nu2);
    if (!paperScaleCoupling || kOverride > 0.0 || betaOverride >= 0.0) {
        par.paperScaleCoupling = false;
        if (kOverride > 0.0) par.k = kOverride;
        if (betaOverride >= 0.0) par.beta = betaOverride;
    }
    return par;
}

std::string RunConfig::toJson() const {
    json j;
    j["grid"] = {{"nx", nx}, {"ny", ny}, {"Lx", Lx}, {"Ly", Ly}};
    j["h"] = h;
    j["steps"] = steps;
    j["c0"] = c0;
    j["gamma"] = gamma;
    j["rho1"] = rho1;
    j["rho2"] = rho2;
    j["nu1"] = nu1;
    j["nu2"] = nu2;
    j["m0_fraction"] = m0Fraction;
    j["scenario"] = scenario;
    j["solver"] = {{"max_iterations", solver.maxIterations},
                   {"gap_tol_rel", solver.gapTolRel},
                   {"check_every", solver.checkEvery},
                   {"primal_step", solver.primalStep},
                   {"dual_step", solver.dualStep},
                   {"stagnation_tol", solver.stagnationTol},
                   {"hard_fail_rel", solver.hardFailRel}};
    j["subtime_samples"] = subtimeSamples;
    j["paper_scale_coupling"] = paperScaleCoupling;
    j["k_override"] = kOverride;
    j["beta_override"] = betaOverride;
    j["v0_amplitude"] = v0Amplitude;
    j["viscous_bc"] = viscousBc;
    j["out_dir"] = outDir;
    j["checkpoint_cadence"] = checkpointCadence;
    j["seed"] = seed;
    j["images"] = writeImages;
    return j.dump(2);
}

RunConfig RunConfig::fromJson(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    if (j.contains("grid")) {
        c.nx = j["grid"].value("nx", c.nx);
        c.ny = j["grid"].value("ny", c.ny);
        c.Lx = j["grid"].value("Lx", c.Lx);
        c.Ly = j["grid"].value("Ly", c.Ly);
    }
    c.h = j.value("h", c.h);
    c.steps = j.value("steps", c.steps);
    c.c0 = j.value("c0", c.c0);
    c.gamma = j.value("gamma", c.gamma);
    c.rho1 = j.value("rho1", c.rho1);
    c.rho2 = j.value("rho2", c.rho2);
    c.nu1 = j.value("nu1", c.nu1);
    c.nu2 = j.value("nu2", c.nu2);
    c.m0Fraction = j.value("m0_fraction", c.m0Fraction);
    c.scenario = j.value("scenario", c.scenario);
    if (j.contains("solver")) {
        const json& s = j["solver"];
        c.solver.maxIterations = s.value("max_iterations", c.solver.maxIterations);
        c.solver.gapTolRel = s.value("gap_tol_rel", c.solver.gapTolRel);
        c.solver.checkEvery = s.value("check_every", c.solver.checkEvery);
        c.solver.primalStep = s.value("primal_step", c.solver.primalStep);
        c.solver.dualStep = s.value("dual_step", c.solver.dualStep);
        c.solver.stagnationTol = s.value("stagnation_tol", c.solver.stagnationTol);
        c.solver.hardFailRel = s.value("hard_fail_rel", c.solver.hardFailRel);
    }
    c.subtimeSamples = j.value("subtime_samples", c.subtimeSamples);
    c.paperScaleCoupling = j.value("paper_scale_coupling", c.paperScaleCoupling);
    c.kOverride = j.value("k_override", c.kOverride);
    c.betaOverride = j.value("beta_override", c.betaOverride);
    c.v0Amplitude = j.value("v0_amplitude", c.v0Amplitude);
    c.viscousBc = j.value("viscous_bc", c.viscousBc);
    c.outDir = j.value("out_dir", c.outDir);
    c.checkpointCadence = j.value("checkpoint_cadence", c.checkpointCadence);
    c.seed = j.value("seed", c.seed);
    c.writeImages = j.value("images", c.writeImages);
    c.validate();
    return c;
}

RunConfig RunConfig::fromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RunConfig: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fromJson(text);
}

unsigned long long RunConfig::hash() const {
    // FNV-1a over the canonical JSON text
    const std::string s = toJson();
    unsigned long long hsh = 1469598103934665603ull;
    for (unsigned char ch : s) {
        hsh ^= ch;
        hsh *= 1099511628211ull;
    }
    return hsh;
}

RunConfig presetConfig(const std::string& name) {
    RunConfig c;
    c.scenario = name;
    c.solver.maxIterations = 1500;
    c.solver.gapTolRel = 5e-4;
    if (name == "stationary-circle") {
        c.nx = c.ny = 64;
        c.h = 1e-3;
        c.steps = 50;
        c.subtimeSamples = 4;
        c.nu1 = c.nu2 = 1e-2;
    } else if (name == "flat-channel") {
        c.nx = c.ny = 32;
        c.h = 1e-3;
        c.steps = 20;
        c.subtimeSamples = 4;
    } else if (name == "ostwald") {
        c.nx = c.ny = 64;
        c.h = 2e-3;
        c.steps = 50;
        c.subtimeSamples = 4;
        c.solver.maxIterations = 2500;
    } else if (name == "sheared-droplet") {
        c.nx = c.ny = 64;
        c.h = 2e-3;
        c.steps = 25;
        c.subtimeSamples = 4;
        c.rho1 = 2.0;
        c.rho2 = 1.0;
        c.nu1 = 3e-2;
        c.nu2 = 1e-2;
        c.v0Amplitude = 0.5;
        c.solver.maxIterations = 2500;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    return c;
}

PhaseIndicator initialIndicator(const RunConfig& cfg) {
    const Grid g = cfg.grid();
    if (cfg.scenario == "stationary-circle") return disk(g, 0.5 * g.Lx, 0.5 * g.Ly, 0.25 * g.Lx);
    if (cfg.scenario == "flat-channel") return halfPlaneY(g, 0.5 * g.Ly);
    if (cfg.scenario == "ostwald")
        return twoDisks(g, 0.3 * g.Lx, 0.5 * g.Ly, 0.1 * g.Lx, 0.7 * g.Lx, 0.5 * g.Ly, 0.18 * g.Lx);
    if (cfg.scenario == "sheared-droplet") return disk(g, 0.4 * g.Lx, 0.5 * g.Ly, 0.2 * g.Lx);
    // generic: a centered disk carrying m0_fraction of the volume
    const double r = std::sqrt(cfg.m0Fraction * g.volume() / M_PI);
    return disk(g, 0.5 * g.Lx, 0.5 * g.Ly, r);
}

namespace {

// deterministic random flip-pair probes for the probe-optimality certificate
std::vector<PhaseIndicator> flipProbes(const PhaseIndicator& chi, unsigned long long seed,
                                       int count) {
    std::vector<PhaseIndicator> out;
    unsigned long long s = seed;
    auto next = [&s]() {
        unsigned long long z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    const int n = chi.size();
    for (int q = 0; q < count; ++q) {
        PhaseIndicator probe = chi;
        int from = -1, to = -1;
        for (int guard = 0; guard < 100000 && from < 0; ++guard) {
            const int k = static_cast<int>(next() % static_cast<unsigned long long>(n));
            if (probe.at(k)) from = k;
        }
        for (int guard = 0; guard < 100000 && to < 0; ++guard) {
            const int k = static_cast<int>(next() % static_cast<unsigned long long>(n));
            if (!probe.at(k)) to = k;
        }
        if (from < 0 || to < 0) break;
        probe.at(from) = 0;
        probe.at(to) = 1;
        out.push_back(std::move(probe));
    }
    return out;
}

VelocityField initialVelocity(const RunConfig& cfg, const StreamSolver& stream) {
    const Grid g = cfg.grid();
    VelocityField v(g);
    if (cfg.v0Amplitude != 0.0) {
        const double kx = M_PI / g.Lx, ky = M_PI / g.Ly;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                v.u(i, j) =
                    cfg.v0Amplitude * ky * std::sin(kx * i * g.dx()) * std::cos(ky * g.yc(j));
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v.v(i, j) =
                    -cfg.v0Amplitude * kx * std::cos(kx * g.xc(i)) * std::sin(ky * j * g.dy());
        // exactly divergence-free representative
        v = stream.applyR(stream.streamOf(v));
    }
    return v;
}

struct CheckpointState {
    int step = 0;
    double t = 0.0;
    double workAccum = 0.0;
    double budget = 0.0;
};

void writeCheckpoint(const std::string& dir, const RunConfig& cfg, const CheckpointState& st,
                     const PhaseIndicator& chi, const VelocityField& v, const VelocityField& uk) {
    const std::string base = dir + "/checkpoint";
    writeIndicator(base + ".chi", chi);
    writeVelocity(base + ".vel", v);
    writeVelocity(base + ".uk", uk);
    json j;
    j["step"] = st.step;
    j["t"] = st.t;
    j["work_accum"] = st.workAccum;
    j["budget"] = st.budget;
    j["config_hash"] = cfg.hash();
    std::ofstream out(base + ".json");
    out << j.dump(2) << "\n";
}

bool readCheckpoint(const std::string& dir, const RunConfig& cfg, CheckpointState& st,
                    PhaseIndicator& chi, VelocityField& v, VelocityField& uk) {
    const std::string base = dir + "/checkpoint";
    if (!fs::exists(base + ".json")) return false;
    std::ifstream in(base + ".json");
    json j = json::parse(in);
    if (j.value("config_hash", 0ull) != cfg.hash())
        throw std::runtime_error("resume: checkpoint was produced by a different configuration");
    st.step = j["step"];
    st.t = j["t"];
    st.workAccum = j["work_accum"];
    st.budget = j["budget"];
    chi = readIndicator(base + ".chi");
    v = readVelocity(base + ".vel");
    uk = readVelocity(base + ".uk");
    return true;
}

} // namespace

Trajectory run(const RunConfig& cfg, bool resume) {
    cfg.validate();
    const Grid g = cfg.grid();
    const bool writing = !cfg.outDir.empty();
    if (writing) fs::create_directories(cfg.outDir);

    NeumannPoisson poisson(g);
    TvScheme tv(g);
    MinStepSolver solver(g, tv, poisson);
    const CapillaryParams params{cfg.c0, cfg.gamma};
    const FluidParams fpar = cfg.fluidParams();
    FluidSolver fluid(g, fpar, cfg.viscousBcEnum());
    StreamSolver stream(g);
    const std::vector<ProbeField> basis = probeBasis(g);

    PhaseIndicator chi = initialIndicator(cfg);
    VelocityField v = initialVelocity(cfg, stream);
    VelocityField uk(g); // filter state, zero at t = 0
    const double m0 = chi.mass();
    DeGiorgiInterpolator dg(solver, params, m0);

    Trajectory traj;
    traj.m0 = m0;
    traj.kUsed = fpar.k;
    traj.betaUsed = fpar.beta;
    traj.outDir = cfg.outDir;
    traj.energyInitial = capillaryEnergy(chi, params, tv);
    ScalarField rho0 = densityOf(chi, fpar);
    traj.totalInitial = traj.energyInitial + kineticEnergy(rho0, v);

    CheckpointState st;
    st.budget = 1e-6 * std::max(traj.totalInitial, 1e-300);

    EnergyLedger ledger;
    {
        LedgerRow r0;
        r0.step = 0;
        r0.t = 0.0;
        r0.energy = traj.energyInitial;
        r0.kinetic = kineticEnergy(rho0, v);
        r0.Fh = traj.energyInitial;
        r0.mass = m0;
        r0.budget = st.budget;
        r0.vNorm = v.l2Norm();
        ledger.append(r0);
    }

    if (resume) {
        if (!writing) throw std::invalid_argument("resume requires an output directory");
        if (readCheckpoint(cfg.outDir, cfg, st, chi, v, uk)) {
            EnergyLedger old = EnergyLedger::readCsv(cfg.outDir + "/ledger.csv");
            ledger.rows.assign(old.rows.begin(), old.rows.begin() + std::min(old.size(), st.step + 1));
        }
    }

    if (writing && st.step == 0) {
        std::ofstream cf(cfg.outDir + "/config.json");
        cf << cfg.toJson() << "\n";
        writeIndicator(cfg.outDir + "/chi_000000.snap", chi);
        ledger.writeCsv(cfg.outDir + "/ledger.csv");
    }

    FluidState state{v, densityOf(chi, fpar), st.t};

    for (int n = st.step + 1; n <= cfg.steps; ++n) {
        // 1. filtered advecting field from the current fluid velocity
        FilterResult fr = fluid.filterStep(uk, state.v, cfg.h);
        uk = fr.u;

        // 2. De Giorgi sub-time samples, geometric toward the step start;
        //    the last sample (T = h) is the accepted minimizing-movement step
        const int K = cfg.subtimeSamples;
        double stepGap = 0.0;
        int stepIters = 0;
        double wQuad = 0.0, workAdv = 0.0;
        double prevT = 0.0, prevDis = -1.0, prevWork = 0.0;
        double phaseClosure = 0.0;
        DeGiorgiSample last;
        WarmStart warm;
        const double fStart = ledger.rows.back().energy; // f(0+) = E[chi_{n-1}]
        for (int i = 1; i <= K; ++i) {
            const double Th = cfg.h * std::pow(2.0, -(K - i));
            std::vector<PhaseIndicator> extra;
            if (i == K) extra = flipProbes(chi, cfg.seed * 0x9e3779b9ull + n, 10);
            DeGiorgiSample s = dg.sample(chi, uk, Th, cfg.solver, extra, &warm);
            stepGap += s.gap;
            stepIters += s.iterations;
            // dissipation and advective-work quadrature on the panel
            const double dis = 0.5 * s.gradW0Sq;
            const double wrk = dg.workIntegrand(chi, uk, s);
            const double disL = (prevDis < 0.0) ? dis : prevDis;
            wQuad += 0.5 * (disL + dis) * (Th - prevT);
            workAdv += 0.5 * ((prevDis < 0.0 ? wrk : prevWork) + wrk) * (Th - prevT);
            prevT = Th;
            prevDis = dis;
            prevWork = wrk;
            last = std::move(s);
        }
        // closure of the binary telescoping f(h) <= f(0+) - quad + work
        phaseClosure = std::max(0.0, last.fBinary - fStart + wQuad - workAdv);

        // 3. potentials at the accepted step; the pullback's mass drift sets
        //    the tolerance scale for the zero-mean precondition
        MeanZeroField ukin = kineticPotential(last.chi, last.target, cfg.h, poisson, 5e-3);
        Potentials pots =
            curvaturePotential(last.chi, last.target, cfg.h, poisson, tv, params, basis);

        // 4. fluid step
        NsStepResult ns = fluid.nsStep(state, chi, last.chi, ukin, pots.w(), cfg.h);

        // 5. ledger row
        st.workAccum += workAdv;
        st.budget += stepGap + phaseClosure + ns.energySlack;
        LedgerRow r;
        r.step = n;
        r.t = n * cfg.h;
        r.energy = last.energyBinary;
        r.kinetic = kineticEnergy(ns.state.rho, ns.state.v);
        r.gradUSq = std::max(0.0, poisson.dirichletEnergy(ukin));
        r.gradWSq = last.gradW0Sq;
        r.viscous = ns.viscousDissipation;
        r.work = ns.work;
        r.Fh = last.fBinary - st.workAccum;
        r.mass = last.chi.mass();
        r.phaseSlack = phaseClosure;
        r.fluidSlack = ns.energySlack;
        r.budget = st.budget;
        r.gap = stepGap;
        r.iterations = stepIters;
        r.threshold = last.threshold;
        r.workAdv = workAdv;
        r.wQuad = wQuad;
        r.betaDissip = ns.betaDissipation;
        r.numDissip = ns.numericalDissipation;
        r.lambda = pots.lambda;
        r.ukNorm = uk.l2Norm();
        r.vNorm = ns.state.v.l2Norm();
        ledger.append(r);

        chi = last.chi;
        state = ns.state;
        st.step = n;
        st.t = r.t;

        if (writing) {
            ledger.writeCsv(cfg.outDir + "/ledger.csv");
            if (n % cfg.checkpointCadence == 0 || n == cfg.steps) {
                writeCheckpoint(cfg.outDir, cfg, st, chi, state.v, uk);
                char name[64];
                std::snprintf(name, sizeof(name), "/chi_%06d.snap", n);
                writeIndicator(cfg.outDir + name, chi);
                std::snprintf(name, sizeof(name), "/vel_%06d", n);
                writeVelocity(cfg.outDir + name, state.v);
                if (cfg.writeImages) {
                    std::snprintf(name, sizeof(name), "/chi_%06d.pgm", n);
                    writePGM(cfg.outDir + name, chi.toScalar());
                }
            }
        }
    }

    traj.ledger = ledger;
    traj.chiFinal = chi;
    traj.vFinal = state.v;
    traj.ukFinal = uk;

    if (writing) {
        const std::vector<CheckReport> fRep{checkMonotoneF(ledger, traj.energyInitial)};
        std::vector<CheckReport> reports = checkDissipation(ledger, traj.totalInitial);
        reports.insert(reports.begin(), fRep.begin(), fRep.end());
        writeReportJson(cfg.outDir + "/report.json", reports);
    }
    return traj;
}

} // namespace capflow
