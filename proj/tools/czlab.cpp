// czlab: batch experiment driver.
//
// Every subcommand writes <name>.summary.json and <name>.detail.csv into the
// output directory and exits 0 iff all asserted invariants passed. Runs are
// deterministic for a fixed seed: all randomness flows through a counter-based
// generator keyed by (seed, experiment, index).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "czlab/commutator.hpp"
#include "czlab/decomp.hpp"
#include "czlab/factorization.hpp"
#include "czlab/jacobian.hpp"
#include "czlab/kernels.hpp"
#include "czlab/parallel.hpp"
#include "czlab/rng.hpp"
#include "czlab/spaces.hpp"

using json = nlohmann::json;
using namespace czlab;

namespace {

struct Reporter {
    std::string name;
    std::string outDir = ".";
    bool emitPlot = false;
    json summary;
    std::vector<std::string> csvLines;
    std::vector<std::pair<double, double>> plotSeries;
    bool ok = true;
    std::vector<std::string> violations;

    void csvHeader(const std::string& cols) { csvLines.insert(csvLines.begin(), cols); }
    void csvRow(const std::string& row) { csvLines.push_back(row); }
    void plot(double x, double y) { plotSeries.emplace_back(x, y); }
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            violations.push_back(what);
        }
    }

    int finish() {
        summary["invariantsPassed"] = ok;
        summary["violations"] = violations;
        {
            std::ofstream js(outDir + "/" + name + ".summary.json");
            js << summary.dump(2) << "\n";
        }
        {
            std::ofstream csv(outDir + "/" + name + ".detail.csv");
            auto now = std::chrono::system_clock::now();
            csv << "# generated "
                << std::chrono::duration_cast<std::chrono::seconds>(
                       now.time_since_epoch())
                       .count()
                << "\n";
            for (const std::string& line : csvLines) csv << line << "\n";
        }
        if (emitPlot) {
            std::ofstream p(outDir + "/" + name + ".plot.csv");
            p << "x,y\n";
            for (auto [x, y] : plotSeries) p << x << "," << y << "\n";
        }
        std::printf("%s: %s (%s.summary.json, %s.detail.csv)\n", name.c_str(),
                    ok ? "ok" : "INVARIANT VIOLATION", name.c_str(),
                    name.c_str());
        for (const std::string& v : violations)
            std::printf("  violation: %s\n", v.c_str());
        return ok ? 0 : 1;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

KernelSpec makeKernel(const std::string& id) {
    if (id == "hilbert") return hilbertKernel();
    if (id == "riesz1") return rieszKernel(1, 2);
    if (id == "riesz2") return rieszKernel(2, 2);
    if (id == "ahlfors") return ahlforsBeurlingKernel();
    throw Error("unknown kernel: " + id +
                " (choose hilbert, riesz1, riesz2, ahlfors)");
}

Grid makeGrid(int dim, double boxSide, std::int64_t n) {
    Point origin{0, 0, 0};
    for (int k = 0; k < dim; ++k) origin[k] = -boxSide / 2;
    return Grid(dim, origin, boxSide, n);
}

GridFunction makeSymbol(const Grid& g, const std::string& id) {
    if (id == "log")
        return GridFunction::fromFunction(g, [&](Point p) {
            double r = 0;
            for (int k = 0; k < g.dim; ++k) r += p[k] * p[k];
            return Complex(0.5 * std::log(r + 1e-24));
        });
    if (id == "coordinate")
        return GridFunction::fromFunction(g,
                                          [](Point p) { return Complex(p[0]); });
    if (id == "sqrtabs")
        return GridFunction::fromFunction(g, [](Point p) {
            return Complex(std::sqrt(std::abs(p[0])));
        });
    if (id == "bump")
        return GridFunction::fromFunction(g, [&](Point p) {
            double r2 = 0;
            for (int k = 0; k < g.dim; ++k) r2 += p[k] * p[k];
            return Complex(r2 < 1 ? std::exp(-1 / (1 - r2)) : 0.0);
        });
    if (id == "constant")
        return GridFunction::fromFunction(g, [](Point) { return Complex(1.0); });
    throw Error("unknown symbol: " + id +
                " (choose log, coordinate, sqrtabs, bump, constant)");
}

GridFunction randomMeanZeroOn(const Grid& g,
                              const std::vector<std::int64_t>& cells,
                              const CounterRng& rng) {
    GridFunction f(g);
    Complex mean(0);
    for (std::size_t j = 0; j < cells.size(); ++j) {
        f.values[cells[j]] = rng.uniform(j, -1, 1);
        f.support[cells[j]] = 1;
        mean += f.values[cells[j]];
    }
    mean /= static_cast<double>(cells.size());
    for (std::int64_t i : cells) f.values[i] -= mean;
    return f;
}

// ---- probe ----------------------------------------------------------------

int runProbe(Reporter& rep, const std::string& kernelId, int dim, double boxSide,
             std::int64_t n, double ballRadius, double A, double epsTarget) {
    KernelSpec K = makeKernel(kernelId);
    if (K.dim != dim)
        throw Error("kernel dimension " + std::to_string(K.dim) +
                    " does not match --d " + std::to_string(dim));
    Grid g = makeGrid(dim, boxSide, n);
    Ball B{{0, 0, 0}, ballRadius};
    rep.summary["config"] = {{"kernel", kernelId},  {"d", dim},
                             {"box", boxSide},      {"n", n},
                             {"ballRadius", ballRadius}, {"A", A},
                             {"epsTarget", epsTarget}};
    rep.csvHeader("A,epsA,kernelMagnitude,distRatio");
    ProbeResult chosen;
    double chosenA = A;
    if (epsTarget > 0) {
        auto [aOut, probe] = chooseA(K, g, B, epsTarget);
        chosenA = aOut;
        chosen = probe;
        for (double a = 4; a <= chosenA; a *= 2) {
            ProbeResult p = probeNonDegeneracy(K, g, B, a);
            rep.csvRow(fmt(a) + "," + fmt(p.epsA) + "," +
                       fmt(std::abs(p.kernelValue)) + "," + fmt(p.distRatio));
            rep.plot(a, p.epsA);
        }
    } else {
        chosen = probeNonDegeneracy(K, g, B, A);
        rep.csvRow(fmt(A) + "," + fmt(chosen.epsA) + "," +
                   fmt(std::abs(chosen.kernelValue)) + "," +
                   fmt(chosen.distRatio));
        rep.plot(A, chosen.epsA);
    }
    rep.summary["A"] = chosenA;
    rep.summary["epsA"] = chosen.epsA;
    rep.summary["partnerCenter"] = {chosen.partner.center[0],
                                    chosen.partner.center[1],
                                    chosen.partner.center[2]};
    rep.summary["partnerRadius"] = chosen.partner.radius;
    rep.summary["kernelMagnitude"] = std::abs(chosen.kernelValue);
    rep.summary["hasPhase"] = chosen.sigma.has_value();
    rep.require(chosen.epsA >= 0, "epsA nonnegative");
    return rep.finish();
}

// ---- awf ------------------------------------------------------------------

int runAwf(Reporter& rep, const std::string& kernelId, int dim, double boxSide,
           std::int64_t n, double ballRadius, double epsTarget, int seeds,
           std::uint64_t seed) {
    KernelSpec K = makeKernel(kernelId);
    Grid g = makeGrid(dim, boxSide, n);
    Ball B{{0, 0, 0}, ballRadius};
    auto [A, probe] = chooseA(K, g, B, epsTarget);
    AwfConfig cfg;
    cfg.B = B;
    cfg.partner = probe.partner;
    cfg.A = A;
    cfg.epsA = probe.epsA;
    rep.summary["config"] = {{"kernel", kernelId},  {"d", dim},
                             {"box", boxSide},      {"n", n},
                             {"ballRadius", ballRadius},
                             {"epsTarget", epsTarget}, {"seeds", seeds},
                             {"seed", seed}};
    rep.summary["A"] = A;
    rep.summary["epsA"] = probe.epsA;
    rep.csvHeader("seed,reconResidual,errSup,cert1,cert2");
    auto cells = cellsIn(g, B);
    double worstRecon = 0, worstErr = 0;
    for (int s = 0; s < seeds; ++s) {
        GridFunction f = randomMeanZeroOn(g, cells, CounterRng(seed, s + 1));
        AwfResult r = awfDouble(K, f, cfg);
        double fSup = f.supNorm();
        rep.csvRow(std::to_string(s) + "," + fmt(r.reconResidual) + "," +
                   fmt(r.certErr) + "," + fmt(r.cert1) + "," + fmt(r.cert2));
        rep.plot(s, r.certErr);
        worstRecon = std::max(worstRecon, r.reconResidual / std::max(1e-300, fSup));
        worstErr = std::max(worstErr, r.certErr);
        rep.require(r.reconResidual <= 1e-10 * fSup, "exact reconstruction");
        rep.require(r.certErr <= 10 * probe.epsA, "error certificate");
    }
    rep.summary["worstReconResidual"] = worstRecon;
    rep.summary["worstErrSup"] = worstErr;
    return rep.finish();
}

// ---- decomp ---------------------------------------------------------------

int runDecomp(Reporter& rep, const std::string& mode, int dim, std::int64_t n,
              int seeds, std::uint64_t seed) {
    Grid g(dim, {0, 0, 0}, 1.0, n);
    Cube q0{{0, 0, 0}, 1.0, 0};
    rep.summary["config"] = {
        {"mode", mode}, {"d", dim}, {"n", n}, {"seeds", seeds}, {"seed", seed}};
    if (mode == "stopping") {
        rep.csvHeader("seed,nodes,maxLevel,maxSup");
        for (int s = 0; s < seeds; ++s) {
            CounterRng rng(seed, s + 1);
            GridFunction f = randomMeanZeroOn(g, cellsIn(g, q0), rng);
            StoppingTree tree = czStopping(f, q0);
            GridFunction sum(g);
            int maxLevel = 0;
            double maxSup = 0;
            double supConst = std::pow(2.0, dim + 1) + 1;
            for (const StoppingNode& node : tree.nodes) {
                sum += node.piece;
                maxLevel = std::max(maxLevel, node.level);
                maxSup = std::max(maxSup, node.piece.supNorm());
                rep.require(node.piece.supNorm() <=
                                supConst * node.avgAbs + 1e-12,
                            "piece sup bound");
            }
            double recon = 0;
            for (std::int64_t i : cellsIn(g, q0))
                recon = std::max(recon, std::abs(sum.values[i] - f.values[i]));
            rep.require(recon <= 1e-12 * std::max(1.0, f.supNorm()),
                        "exact reconstruction");
            rep.csvRow(std::to_string(s) + "," +
                       std::to_string(tree.nodes.size()) + "," +
                       std::to_string(maxLevel) + "," + fmt(maxSup));
            rep.plot(s, static_cast<double>(tree.nodes.size()));
        }
    } else if (mode == "sparse") {
        rep.csvHeader("seed,cubes,dominationConstant");
        double cap = std::pow(2.0, dim + 2);
        for (int s = 0; s < seeds; ++s) {
            CounterRng rng(seed, s + 1);
            GridFunction b(g);
            for (std::int64_t i : cellsIn(g, q0)) {
                b.values[i] = rng.uniform(i, -1, 1);
                b.support[i] = 1;
            }
            SparseFamily fam = lernerSparse(b, q0);
            rep.require(fam.dominationConstant <= cap, "pointwise domination");
            rep.csvRow(std::to_string(s) + "," +
                       std::to_string(fam.cubes.size()) + "," +
                       fmt(fam.dominationConstant));
            rep.plot(s, fam.dominationConstant);
        }
    } else if (mode == "doob") {
        rep.csvHeader("seed,p,ratio");
        double eta = 0.5;
        for (int s = 0; s < seeds; ++s) {
            CounterRng rng(seed, s + 1);
            std::uint64_t ctr = 0;
            std::vector<Cube> cubes;
            std::vector<std::vector<std::int64_t>> subsets;
            std::vector<double> lambda;
            std::vector<std::uint8_t> used(g.totalCells(), 0);
            int m = 1 + static_cast<int>(rng.index(ctr++, 6));
            for (int k = 0; k < m; ++k) {
                int gen = static_cast<int>(rng.index(ctr++, 4));
                double side = 1.0 / (1 << gen);
                int slots = 1 << gen;
                Cube q{{side * rng.index(ctr++, slots),
                        dim > 1 ? side * rng.index(ctr++, slots) : 0, 0},
                       side, gen};
                auto qc = cellsIn(g, q);
                std::vector<std::int64_t> e;
                for (std::int64_t i : qc)
                    if (!used[i]) e.push_back(i);
                if (2 * e.size() < qc.size()) continue;
                e.resize((qc.size() + 1) / 2);
                for (std::int64_t i : e) used[i] = 1;
                cubes.push_back(q);
                subsets.push_back(e);
                lambda.push_back(rng.uniform(ctr++, 0.1, 3.0));
            }
            if (cubes.empty()) continue;
            for (double p : {1.5, 2.0, 3.0}) {
                DoobReport r = doobCheck(g, cubes, subsets, lambda, p, eta);
                rep.require(r.ratio <= 4 / eta, "stacked norm comparison");
                rep.csvRow(std::to_string(s) + "," + fmt(p) + "," +
                           fmt(r.ratio));
                rep.plot(s, r.ratio);
            }
        }
    } else {
        throw Error("unknown decomp mode: " + mode +
                    " (choose stopping, sparse, doob)");
    }
    return rep.finish();
}

// ---- theta ----------------------------------------------------------------

int runTheta(Reporter& rep, const std::string& modeId, const std::string& bId,
             double p, double q, int k, double boxSide, std::int64_t n,
             double weightExp) {
    Grid g = makeGrid(1, boxSide, n);
    GridFunction b = makeSymbol(g, bId);
    KernelSpec K = hilbertKernel();
    ExponentConfig cfg(p, q, k, 1);
    ThetaMode mode;
    if (modeId == "single") mode = ThetaMode::Single;
    else if (modeId == "multi") mode = ThetaMode::Multi;
    else if (modeId == "weighted") mode = ThetaMode::Weighted;
    else throw Error("unknown theta mode: " + modeId);

    PairSampler sampler;
    double maxPos = boxSide / 16;
    for (double r : {1.0, 2.0, 4.0})
        for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0})
            sampler.pairs.push_back({Ball{{c * maxPos, 0, 0}, r},
                                     Ball{{c * maxPos + 4 * r, 0, 0}, r}, r,
                                     c * maxPos});

    rep.summary["config"] = {{"mode", modeId}, {"b", bId},   {"p", p},
                             {"q", q},         {"k", k},     {"box", boxSide},
                             {"n", n},         {"weightExp", weightExp},
                             {"pairs", sampler.pairs.size()},
                             {"sepFactor", sampler.sepFactor}};
    rep.csvHeader("mode,p,q,k,scale,position,pairing,normalizer,ratio");

    ThetaEstimate est;
    if (mode == ThetaMode::Weighted) {
        GridFunction mu = GridFunction::fromFunction(g, [&](Point pt) {
            return Complex(std::pow(std::abs(pt[0]) + 1e-12, weightExp));
        });
        GridFunction lam = GridFunction::fromFunction(g, [&](Point pt) {
            return Complex(std::pow(std::abs(pt[0]) + 1e-12, -weightExp));
        });
        WeightTriple wt(mu, lam, p, cubeLattice(g));
        ThetaWeights weights{&wt.mu, &wt.lambdaDual};
        est = thetaLowerBound(b, K, cfg, mode, sampler, weights);
    } else {
        est = thetaLowerBound(b, K, cfg, mode, sampler);
    }
    for (const ThetaWitness& w : est.witnesses) {
        rep.csvRow(modeId + "," + fmt(p) + "," + fmt(q) + "," +
                   std::to_string(k) + "," + fmt(w.scale) + "," +
                   fmt(w.position) + "," + fmt(std::abs(w.pairingValue)) +
                   "," + fmt(w.normalizer) + "," + fmt(w.ratio));
        rep.plot(w.scale, w.ratio);
    }
    rep.summary["theta"] = est.value;
    rep.require(est.value >= 0, "theta nonnegative");
    return rep.finish();
}

// ---- median ---------------------------------------------------------------

int runMedian(Reporter& rep, const std::string& bId, int k, double A,
              double boxSide, std::int64_t n, double ballRadius) {
    Grid g = makeGrid(1, boxSide, n);
    GridFunction b = makeSymbol(g, bId);
    Ball B{{0, 0, 0}, ballRadius};
    MedianBound mb = medianLowerBound(b, hilbertKernel(), k, B, A);
    rep.summary["config"] = {{"b", bId}, {"k", k},   {"A", A},
                             {"box", boxSide}, {"n", n},
                             {"ballRadius", ballRadius}};
    rep.summary["lhs"] = mb.lhs;
    rep.summary["sumPairings"] = mb.sumPairings;
    rep.summary["ratio"] = mb.ratio;
    rep.summary["reportConstant"] = mb.reportConstant;
    rep.summary["boundHolds"] = mb.boundHolds;
    rep.csvHeader("witness,adjointRole,fCells,gCells,pairingMagnitude");
    for (std::size_t i = 0; i < mb.witnesses.size(); ++i) {
        const MedianWitness& w = mb.witnesses[i];
        rep.csvRow(std::to_string(i) + "," + std::to_string(w.adjointRole) +
                   "," + std::to_string(w.fCells.size()) + "," +
                   std::to_string(w.gCells.size()) + "," +
                   fmt(std::abs(w.pairingValue)));
        rep.plot(static_cast<double>(i), std::abs(w.pairingValue));
    }
    rep.require(mb.boundHolds, "median lower bound");
    return rep.finish();
}

// ---- classify -------------------------------------------------------------

int runClassify(Reporter& rep, const std::string& bId, double boxSide,
                std::int64_t n) {
    Grid g = makeGrid(1, boxSide, n);
    GridFunction b = makeSymbol(g, bId);
    OscillationProfile prof = oscillationClassify(b);
    rep.summary["config"] = {{"b", bId}, {"box", boxSide}, {"n", n}};
    const char* cls = "none";
    switch (prof.cls) {
        case OscClass::BMO: cls = "bmo"; break;
        case OscClass::Hoelder: cls = "hoelder"; break;
        case OscClass::Constant: cls = "constant"; break;
        case OscClass::None: cls = "none"; break;
    }
    rep.summary["class"] = cls;
    rep.summary["alphaHat"] = prof.alphaHat;
    rep.csvHeader("scale,maxOscillation");
    for (auto [scale, osc] : prof.profile) {
        rep.csvRow(fmt(scale) + "," + fmt(osc));
        rep.plot(std::log(scale), osc > 0 ? std::log(osc) : 0);
    }
    return rep.finish();
}

// ---- jacobian -------------------------------------------------------------

int runJacobian(Reporter& rep, const std::string& mode, std::int64_t n,
                int rounds, std::uint64_t seed) {
    rep.summary["config"] = {
        {"mode", mode}, {"n", n}, {"rounds", rounds}, {"seed", seed}};
    if (mode == "det") {
        Grid g(2, {0, 0, 0}, 1.0, n);
        Cube window{{0.25, 0.25, 0}, 0.5, 0};
        VectorField u;
        for (int j = 0; j < 2; ++j) {
            GridFunction c(g);
            for (std::int64_t i : cellsIn(g, window)) {
                Point m = g.midpoint(i);
                c.values[i] =
                    j == 0 ? 2 * m[0] + 0.5 * m[1] : -m[0] + 1.5 * m[1];
                c.support[i] = 1;
            }
            u.comp.push_back(c);
        }
        GridFunction ju = jacobianDet(u);
        Cube inner{{0.25 + 3 * g.h(), 0.25 + 3 * g.h(), 0}, 0.5 - 6 * g.h(), 0};
        double err = 0;
        for (std::int64_t i : cellsIn(g, inner))
            err = std::max(err, std::abs(ju.values[i] - Complex(3.5)));
        rep.summary["affineDetError"] = err;
        rep.csvHeader("quantity,value");
        rep.csvRow("affineDetError," + fmt(err));
        rep.require(err <= 1e-10, "affine determinant exact");
    } else if (mode == "lift") {
        rep.csvHeader("n,supError");
        double prev = -1;
        for (std::int64_t m : {n / 4, n / 2, n}) {
            Grid g(2, {0, 0, 0}, 1.0, m);
            GridFunction phi =
                bumpFunction(g, Cube{{0.4375, 0.4375, 0}, 0.125, 0});
            GridFunction w(g);
            for (std::int64_t i : phi.supportCells()) {
                Point pt = g.midpoint(i);
                w.values[i] =
                    phi.values[i] * std::sin(7 * pt[0] + 3 * pt[1]);
                w.support[i] = 1;
            }
            Cube q{{0.3, 0.3, 0}, 0.4, 0};
            VectorField u = liftDerivativeToJacobian(w, 0, q);
            GridFunction ju = jacobianDet(u);
            GridFunction dw = detail::centralDiff(w, 0, false);
            double err = 0;
            for (std::int64_t i : cellsIn(g, q))
                err = std::max(err, std::abs(ju.values[i] - dw.values[i]));
            rep.csvRow(std::to_string(m) + "," + fmt(err));
            rep.plot(static_cast<double>(m), err);
            rep.require(err <= 1e-10 * std::max(1.0, dw.supNorm()),
                        "lifted determinant matches the derivative");
            prev = err;
        }
        (void)prev;
    } else if (mode == "divsolve") {
        Grid g(2, {0, 0, 0}, 1.0, n);
        CounterRng rng(seed, 1);
        std::vector<Complex> spec(g.totalCells(), Complex(0));
        std::uint64_t ctr = 0;
        for (std::int64_t i = 0; i < g.totalCells(); ++i) {
            Index3 idx = g.unflatten(i);
            bool keep = true;
            for (int kk = 0; kk < 2; ++kk) {
                std::int64_t w = idx[kk] <= g.n / 2 ? idx[kk] : idx[kk] - g.n;
                if (std::abs(w) > 3 * g.n / 8) keep = false;
            }
            if (keep && !(idx[0] == 0 && idx[1] == 0))
                spec[i] = Complex(rng.normal(ctr), rng.normal(ctr + 1));
            ctr += 2;
        }
        detail::dft(g, spec, +1);
        GridFunction gf(g);
        for (std::int64_t i = 0; i < g.totalCells(); ++i) {
            gf.values[i] = spec[i].real();
            gf.support[i] = 1;
        }
        VectorField v = divSolve(gf);
        GridFunction div = spectralDivergence(v);
        double num = 0, den = 0;
        for (std::int64_t i = 0; i < g.totalCells(); ++i) {
            num += std::norm(div.values[i] - gf.values[i]);
            den += std::norm(gf.values[i]);
        }
        double resid = std::sqrt(num / den);
        rep.summary["residual"] = resid;
        rep.csvHeader("quantity,value");
        rep.csvRow("residual," + fmt(resid));
        for (int j = 0; j < 2; ++j) {
            double gn = gradientLpNorm(v.comp[j], 2.0, true);
            rep.summary["gradNorm" + std::to_string(j + 1)] = gn;
            rep.csvRow("gradNorm" + std::to_string(j + 1) + "," + fmt(gn));
        }
        rep.require(resid <= 1e-8, "divergence residual");
    } else if (mode == "span") {
        Grid g(2, {0, 0, 0}, 1.0, n);
        GridFunction f = GridFunction::fromFunction(g, [](Point p) {
            return Complex(std::sin(2 * kPi * p[0]) *
                           std::sin(2 * kPi * p[1]));
        });
        SpanRepresentation r = jacobianSpanRepresent(f, 2.0, rounds);
        rep.summary["initialNorm"] = r.initialNorm;
        rep.csvHeader("round,residualNorm,gradientBudget");
        double prev = r.initialNorm;
        for (std::size_t j = 0; j < r.rounds.size(); ++j) {
            rep.csvRow(std::to_string(j + 1) + "," +
                       fmt(r.rounds[j].residualNorm) + "," +
                       fmt(r.rounds[j].gradientBudget));
            rep.plot(static_cast<double>(j + 1), r.rounds[j].residualNorm);
            rep.require(r.rounds[j].residualNorm < prev,
                        "residual strictly decreasing");
            prev = r.rounds[j].residualNorm;
        }
        rep.summary["finalResidual"] = r.rounds.back().residualNorm;
    } else {
        throw Error("unknown jacobian mode: " + mode +
                    " (choose det, lift, divsolve, span)");
    }
    return rep.finish();
}

// ---- sconvex --------------------------------------------------------------

int runSconvex(Reporter& rep, int dim, double epsilon, int terms, int trials,
               std::uint64_t seed) {
    SConvexProblem P;
    P.n = dim;
    for (int i = 0; i < dim; ++i) {
        std::vector<double> v(dim, 0.0);
        v[i] = 1;
        P.V.push_back(v);
        v[i] = -1;
        P.V.push_back(v);
    }
    P.epsilon = epsilon;
    double beta = containedBallRadius(P, 128);
    rep.summary["config"] = {{"dim", dim},     {"epsilon", epsilon},
                             {"terms", terms}, {"trials", trials},
                             {"seed", seed}};
    rep.summary["betaHat"] = beta;
    rep.csvHeader("trial,term,residualNorm,envelope");
    CounterRng rng(seed, 0);
    std::uint64_t ctr = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(dim);
        double n2 = 0;
        for (int i = 0; i < dim; ++i) {
            x[i] = rng.normal(ctr);
            ctr += 2;
            n2 += x[i] * x[i];
        }
        double target = rng.uniform(ctr++) * 0.9 * (1 - epsilon) * beta;
        for (double& xi : x) xi *= target / std::sqrt(n2);
        SConvexRepresentation r = sconvexRepresent(P, x, terms);
        for (std::size_t kTerm = 0; kTerm < r.residualNorms.size(); ++kTerm) {
            double envelope = std::pow(epsilon, kTerm + 1) * beta;
            rep.csvRow(std::to_string(t) + "," + std::to_string(kTerm + 1) +
                       "," + fmt(r.residualNorms[kTerm]) + "," +
                       fmt(envelope));
            if (t == 0)
                rep.plot(static_cast<double>(kTerm + 1),
                         r.residualNorms[kTerm]);
            rep.require(r.residualNorms[kTerm] <= envelope + 1e-12,
                        "geometric residual envelope");
        }
    }
    return rep.finish();
}

// ---- roots ----------------------------------------------------------------

int runRoots(Reporter& rep, int d, int N) {
    rep.summary["config"] = {{"d", d}, {"N", N}};
    rep.csvHeader("tuple,numerator,denominator");
    std::vector<int> tuple(d, 1);
    int rows = 0;
    while (true) {
        Rational viaEnum = rootsOfUnityMoment(d, tuple);
        Rational viaForm = rootsOfUnityMomentClosedForm(d, tuple);
        rep.require(viaEnum == viaForm, "enumeration matches closed form");
        std::string label;
        for (int j = 0; j < d; ++j)
            label += (j ? "|" : "") + std::to_string(tuple[j]);
        rep.csvRow(label + "," + std::to_string(viaEnum.num) + "," +
                   std::to_string(viaEnum.den));
        ++rows;
        int pos = 0;
        while (pos < d) {
            if (++tuple[pos] <= N) break;
            tuple[pos] = 1;
            ++pos;
        }
        if (pos == d) break;
    }
    rep.summary["tuples"] = rows;
    return rep.finish();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"czlab: singular-integral and Jacobian experiment driver"};
    app.require_subcommand(1);

    std::string name, outDir = ".";
    bool emitPlot = false;
    std::uint64_t seed = 0;
    app.add_option("--name", name, "output basename (default: subcommand)");
    app.add_option("--out-dir", outDir, "output directory");
    app.add_flag("--emit-plotdata", emitPlot, "also write <name>.plot.csv");
    app.add_option("--seed", seed, "random seed");

    // probe
    auto* probe = app.add_subcommand("probe", "kernel non-degeneracy probe");
    std::string pKernel = "hilbert";
    int pDim = 1;
    double pBox = 1024, pBall = 2, pA = 0, pEps = 0.1;
    std::int64_t pN = 4096;
    probe->add_option("--kernel", pKernel, "hilbert|riesz1|riesz2|ahlfors");
    probe->add_option("--d", pDim, "dimension");
    probe->add_option("--box", pBox, "box side length, centered at origin");
    probe->add_option("--n", pN, "cells per axis (power of two)");
    probe->add_option("--ball", pBall, "probe ball radius");
    probe->add_option("--A", pA, "fixed scale separation (disables search)");
    probe->add_option("--eps-target", pEps, "target epsA for the search");

    // awf
    auto* awf = app.add_subcommand("awf", "approximate weak factorization");
    std::string aKernel = "hilbert";
    int aDim = 1, aSeeds = 10;
    double aBox = 512, aBall = 1, aEps = 0.1;
    std::int64_t aN = 4096;
    awf->add_option("--kernel", aKernel, "hilbert|riesz1|riesz2|ahlfors");
    awf->add_option("--d", aDim, "dimension");
    awf->add_option("--box", aBox, "box side length");
    awf->add_option("--n", aN, "cells per axis");
    awf->add_option("--ball", aBall, "support ball radius");
    awf->add_option("--eps-target", aEps, "target epsA");
    awf->add_option("--seeds", aSeeds, "number of random inputs");

    // decomp
    auto* dec = app.add_subcommand("decomp", "dyadic decompositions");
    std::string dMode = "stopping";
    int dDim = 1, dSeeds = 20;
    std::int64_t dN = 256;
    dec->add_option("--mode", dMode, "stopping|sparse|doob");
    dec->add_option("--d", dDim, "dimension");
    dec->add_option("--n", dN, "cells per axis");
    dec->add_option("--seeds", dSeeds, "number of random inputs");

    // theta
    auto* theta = app.add_subcommand("theta", "commutator lower-bound sweep");
    std::string tMode = "single", tB = "log";
    double tP = 2, tQ = 2, tBox = 128, tWeightExp = 0.3;
    int tK = 1;
    std::int64_t tN = 4096;
    theta->add_option("--mode", tMode, "single|multi|weighted");
    theta->add_option("--b", tB, "symbol: log|coordinate|sqrtabs|bump|constant");
    theta->add_option("--p", tP, "exponent p");
    theta->add_option("--q", tQ, "exponent q");
    theta->add_option("--k", tK, "commutator order");
    theta->add_option("--box", tBox, "box side length");
    theta->add_option("--n", tN, "cells per axis");
    theta->add_option("--weight-exp", tWeightExp,
                      "power-weight exponent for weighted mode");

    // median
    auto* med = app.add_subcommand("median", "median-method lower bound");
    std::string mB = "coordinate";
    int mK = 1;
    double mA = 8, mBox = 512, mBall = 2;
    std::int64_t mN = 4096;
    med->add_option("--b", mB, "symbol");
    med->add_option("--k", mK, "commutator order");
    med->add_option("--A", mA, "scale separation");
    med->add_option("--box", mBox, "box side length");
    med->add_option("--n", mN, "cells per axis");
    med->add_option("--ball", mBall, "ball radius");

    // classify
    auto* cls = app.add_subcommand("classify", "oscillation profile");
    std::string cB = "log";
    double cBox = 128;
    std::int64_t cN = 4096;
    cls->add_option("--b", cB, "symbol");
    cls->add_option("--box", cBox, "box side length");
    cls->add_option("--n", cN, "cells per axis");

    // jacobian
    auto* jac = app.add_subcommand("jacobian", "jacobian calculus");
    std::string jMode = "span";
    std::int64_t jN = 128;
    int jRounds = 5;
    jac->add_option("--mode", jMode, "det|lift|divsolve|span");
    jac->add_option("--n", jN, "cells per axis");
    jac->add_option("--rounds", jRounds, "greedy rounds for span mode");

    // sconvex
    auto* scx = app.add_subcommand("sconvex", "s-convex representation");
    int sDim = 5, sTerms = 20, sTrials = 10;
    double sEps = 0.5;
    scx->add_option("--dim", sDim, "ambient dimension");
    scx->add_option("--epsilon", sEps, "contraction factor");
    scx->add_option("--terms", sTerms, "terms per representation");
    scx->add_option("--trials", sTrials, "random inputs");

    // roots
    auto* rts = app.add_subcommand("roots", "roots-of-unity moment table");
    int rD = 2, rN = 3;
    rts->add_option("--d", rD, "root order and tuple length");
    rts->add_option("--N", rN, "maximum index");

    for (CLI::App* sub : {probe, awf, dec, theta, med, cls, jac, scx, rts})
        sub->fallthrough(true);

    CLI11_PARSE(app, argc, argv);

    try {
        Reporter rep;
        rep.outDir = outDir;
        rep.emitPlot = emitPlot;
        auto* sub = app.get_subcommands().front();
        rep.name = name.empty() ? sub->get_name() : name;
        rep.summary["subcommand"] = sub->get_name();
        rep.summary["seed"] = seed;
        rep.summary["threads"] = threadCount();
        if (sub == probe)
            return runProbe(rep, pKernel, pDim, pBox, pN, pBall, pA,
                            pA > 0 ? 0 : pEps);
        if (sub == awf)
            return runAwf(rep, aKernel, aDim, aBox, aN, aBall, aEps, aSeeds,
                          seed);
        if (sub == dec) return runDecomp(rep, dMode, dDim, dN, dSeeds, seed);
        if (sub == theta)
            return runTheta(rep, tMode, tB, tP, tQ, tK, tBox, tN, tWeightExp);
        if (sub == med) return runMedian(rep, mB, mK, mA, mBox, mN, mBall);
        if (sub == cls) return runClassify(rep, cB, cBox, cN);
        if (sub == jac) return runJacobian(rep, jMode, jN, jRounds, seed);
        if (sub == scx)
            return runSconvex(rep, sDim, sEps, sTerms, sTrials, seed);
        if (sub == rts) return runRoots(rep, rD, rN);
        std::fprintf(stderr, "unhandled subcommand\n");
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
