#include "capflow/potentials.hpp"

#include <cmath>

namespace capflow {

MeanZeroField kineticPotential(const PhaseIndicator& chiNew, const ScalarField& advectedPrev,
                               double h, const NeumannPoisson& poisson, double massTol) {
    requireSameGrid(chiNew.grid(), advectedPrev.grid(), "kineticPotential");
    if (h <= 0.0) throw std::invalid_argument("kineticPotential: h must be positive");
    ScalarField d(chiNew.grid());
    for (int k = 0; k < d.size(); ++k) d.at(k) = chiNew.at(k) - advectedPrev.at(k);
    const double drift = std::fabs(d.integral());
    if (drift > massTol * std::max(1e-300, chiNew.mass()))
        throw MassDriftError("kineticPotential: mass drift between chi and advected target", drift);
    MeanZeroField phi = poisson.solve(projectMeanZero(d));
    phi *= -1.0 / h;
    return MeanZeroField::require(phi);
}

Potentials curvaturePotential(const PhaseIndicator& chiT, const ScalarField& advectedPrev,
                              double Th, const NeumannPoisson& poisson, const TvScheme& tv,
                              const CapillaryParams& params, const std::vector<ProbeField>& probes) {
    Potentials pot;
    pot.u = kineticPotential(chiT, advectedPrev, Th, poisson, 5e-3);
    pot.w0 = pot.u; // same assembly at this sub-time weight
    pot.gradW0Sq = std::max(0.0, poisson.dirichletEnergy(pot.w0));

    const InterfaceGeometry geom = interfaceGeometry(chiT, tv);
    double num = 0.0, den = 0.0;
    for (const ProbeField& B : probes) {
        if (B.solenoidal) continue;
        const double dB = chiDivInner(chiT, B);
        const double rB = params.c0 * firstVariation(geom, B) - chiDivInner(chiT, pot.w0, B);
        num += rB * dB;
        den += dB * dB;
    }
    if (den < 1e-14) {
        pot.lambda = 0.0;
        pot.lambdaDegenerate = true;
    } else {
        pot.lambda = num / den;
    }
    double l2 = 0.0;
    for (int k = 0; k < pot.w0.size(); ++k) {
        const double v = pot.w0.at(k) + pot.lambda;
        l2 += v * v;
    }
    pot.wH1 = std::sqrt(l2 * chiT.grid().cellVolume() + pot.gradW0Sq);
    return pot;
}

MinStepProblem DeGiorgiInterpolator::problemAt(const PhaseIndicator& chiPrev,
                                               const VelocityField& uk, double Th) const {
    const FlowMapSample map = integrateFlow(uk, Th);
    MinStepProblem p;
    p.target = pullback(chiPrev, map);
    p.tau = Th;
    p.params = params_;
    p.m0 = m0_;
    return p;
}

DeGiorgiSample DeGiorgiInterpolator::sample(const PhaseIndicator& chiPrev, const VelocityField& uk,
                                            double Th, const RelaxedSolverConfig& cfg,
                                            const std::vector<PhaseIndicator>& extraProbes,
                                            WarmStart* warm) const {
    if (Th <= 0.0) throw std::invalid_argument("DeGiorgiInterpolator: sub-time weight not in (0,h]");
    MinStepProblem p = problemAt(chiPrev, uk, Th);
    const Grid& g = p.target.grid();

    std::vector<PhaseIndicator> probes;
    probes.push_back(chiPrev);
    std::vector<double> tvals(p.target.size());
    for (int k = 0; k < p.target.size(); ++k) tvals[k] = p.target.at(k);
    probes.push_back(thresholdToMass(tvals, g, p.targetCount(g)));
    for (const PhaseIndicator& e : extraProbes) probes.push_back(e);

    const MinStepResult res = solver_.minimize(p, cfg, probes, warm);

    DeGiorgiSample s;
    s.Th = Th;
    s.chi = res.chi;
    s.relaxed = res.relaxed;
    s.target = p.target;
    s.fRelaxed = res.objectiveRelaxed;
    s.fBinary = res.objectiveBinary;
    s.energyBinary = res.energyBinary;
    s.fidelityBinary = res.fidelityBinary;
    s.gap = res.gap;
    s.iterations = res.iterations;
    s.hm1DiffSq = 2.0 * Th * res.fidelityBinary;
    s.gradW0Sq = s.hm1DiffSq / (Th * Th);
    s.threshold = res.thresholdLevel;
    return s;
}

DeGiorgiInterpolator::DerivativeSides DeGiorgiInterpolator::derivativeCheck(
    const PhaseIndicator& chiPrev, const VelocityField& uk, double Th,
    const RelaxedSolverConfig& cfg, double fdStepRel) const {
    // The check runs on the binary value function: between selection switches
    // the minimizer chi_t is constant in t, so f(t) = E[chi] + (1/2t)
    // ||chi - g_t||^2 differentiates through exactly the two channels of the
    // identity (the 1/2t weight and the flow-map motion of the target), and
    // both sides are free of solver noise.
    const double dt = fdStepRel * Th;
    DeGiorgiSample mid = sample(chiPrev, uk, Th, cfg);
    const Grid& g = chiPrev.grid();
    const NeumannPoisson& poisson = solver_.poisson();

    auto fBinAt = [&](double t) {
        const FlowMapSample map = integrateFlow(uk, t);
        const ScalarField gt = pullback(chiPrev, map);
        ScalarField d(g);
        for (int k = 0; k < d.size(); ++k) d.at(k) = mid.chi.at(k) - gt.at(k);
        const double q = std::max(0.0, poisson.hm1NormSq(projectMeanZero(d)));
        return mid.energyBinary + q / (2.0 * t);
    };

    DerivativeSides out;
    out.fdSlope = (fBinAt(Th + dt) - fBinAt(Th - dt)) / (2.0 * dt);

    ScalarField r(g);
    for (int k = 0; k < r.size(); ++k) r.at(k) = mid.chi.at(k) - mid.target.at(k);
    const MeanZeroField rz = projectMeanZero(r);
    const double Q = std::max(0.0, poisson.hm1NormSq(rz));
    out.firstTerm = -Q / (2.0 * Th * Th);
    out.workTerm = workIntegrand(chiPrev, uk, mid);
    out.rhs = out.firstTerm + out.workTerm;
    return out;
}

double DeGiorgiInterpolator::workIntegrand(const PhaseIndicator& chiPrev, const VelocityField& uk,
                                           const DeGiorgiSample& smp) const {
    // (chi u, grad(w o X_t)) with w = -(-Lap)^{-1}(delta)/t, assembled in the
    // pre-by-parts form of the chain rule: the time derivative of the discrete
    // pullback is -(grad chi-tilde)(foot) . u(foot) with chi-tilde the
    // bilinear interpolant, which keeps the evaluation consistent with the
    // flow map the targets are built from.
    const Grid& g = chiPrev.grid();
    const NeumannPoisson& poisson = solver_.poisson();
    const double Th = smp.Th;
    ScalarField r(g);
    for (int k = 0; k < r.size(); ++k) r.at(k) = smp.chi.at(k) - smp.target.at(k);
    const MeanZeroField phi = poisson.solve(projectMeanZero(r));
    const FlowMapSample map = integrateFlow(uk, Th);
    const double hx = g.dx(), hy = g.dy();
    double inner = 0.0; // sum psi(c) * d/dt[chi o X_{-t}](c)
    for (int k = 0; k < g.cellCount(); ++k) {
        const double fx = map.footX[k], fy = map.footY[k];
        double s = (fx - 0.5 * hx) / hx;
        double t = (fy - 0.5 * hy) / hy;
        s = std::clamp(s, 0.0, static_cast<double>(g.nx - 1));
        t = std::clamp(t, 0.0, static_cast<double>(g.ny - 1));
        const int i0 = std::max(0, std::min(static_cast<int>(s), g.nx - 2));
        const int j0 = std::max(0, std::min(static_cast<int>(t), g.ny - 2));
        const double fs = s - i0, ft = t - j0;
        const double c00 = chiPrev(i0, j0), c10 = chiPrev(i0 + 1, j0);
        const double c01 = chiPrev(i0, j0 + 1), c11 = chiPrev(i0 + 1, j0 + 1);
        const double gx = ((c10 - c00) * (1 - ft) + (c11 - c01) * ft) / hx;
        const double gy = ((c01 - c00) * (1 - fs) + (c11 - c10) * fs) / hy;
        const double us = uk.sampleU(fx, fy), vs = uk.sampleV(fx, fy);
        inner += phi.at(k) * (-(gx * us + gy * vs));
    }
    inner *= g.cellVolume();
    return -inner / Th;
}

} // namespace capflow
