#pragma once

#include <cmath>
#include <vector>

#include "czlab/commutator.hpp"
#include "czlab/errors.hpp"
#include "czlab/grid.hpp"
#include "czlab/kernels.hpp"

namespace czlab {

namespace detail {

inline double meanZeroTolerance(const GridFunction& f) {
    return 1e-12 *
           std::max(1.0, f.supNorm() *
                             static_cast<double>(f.supportCells().size()) *
                             f.grid.cellMeasure());
}

inline void requireMeanZero(const GridFunction& f) {
    if (std::abs(integrate(f)) > meanZeroTolerance(f)) throw NotMeanZero();
}

} // namespace detail

struct AwfStep {
    GridFunction h;    // on supp f
    GridFunction fErr; // f-tilde, on supp g
    GridFunction Sh;   // Sh on supp g (shared with fErr = -g*Sh)
    GridFunction SstarG; // S*g on supp f
    double minSstarG = 0;
    double certGH = 0;   // ||g||inf * ||h||inf
    double certErr = 0;  // ||fErr||inf / ||f||inf
    double reconResidual = 0;
};

/// One factorization step for the operator S carried by K:
///   h = -f / (S*g) on supp f,  fErr = -g (Sh) on supp g,
/// so that f = g(Sh) - h(S*g) + fErr holds cell-wise.
inline AwfStep awfStep(const KernelSpec& K, const GridFunction& f,
                       const GridFunction& g, const Ball& gAmbient, double A) {
    detail::requireMeanZero(f);
    double gSup = 0;
    for (std::int64_t i : g.supportCells()) {
        if (g.values[i].imag() != 0.0 || g.values[i].real() < 0) throw NegativeG();
        gSup = std::max(gSup, g.values[i].real());
    }
    if (gSup > 0) {
        double gAvg = average(g, gAmbient).real();
        if (gSup > 8 * gAvg + 1e-12)
            throw Error("awfStep: g exceeds 8 times its ambient average");
    }

    const Grid& grid = f.grid;
    auto fCells = f.supportCells();
    auto gCells = g.supportCells();

    AwfStep out;
    out.h = GridFunction(grid);
    out.fErr = GridFunction(grid);
    if (fCells.empty()) {
        out.Sh = GridFunction(grid);
        out.SstarG = GridFunction(grid);
        return out;
    }

    out.SstarG = applyOffSupportCells(K.adjoint(), g, fCells);
    double minMag = std::numeric_limits<double>::infinity();
    for (std::int64_t i : fCells)
        minMag = std::min(minMag, std::abs(out.SstarG.values[i]));
    out.minSstarG = minMag;
    if (minMag < 1e-6 * std::pow(A, -grid.dim) * gSup) throw DegeneratePairing();

    for (std::int64_t i : fCells) {
        out.h.values[i] = -f.values[i] / out.SstarG.values[i];
        out.h.support[i] = 1;
    }

    out.Sh = applyOffSupportCells(K, out.h, gCells);
    for (std::int64_t i : gCells) {
        out.fErr.values[i] = -g.values[i] * out.Sh.values[i];
        out.fErr.support[i] = 1;
    }

    double fSup = f.supNorm();
    out.certGH = gSup * out.h.supNorm();
    out.certErr = fSup > 0 ? out.fErr.supNorm() / fSup : 0;

    double res = 0;
    for (std::int64_t i = 0; i < grid.totalCells(); ++i) {
        Complex recon = g.values[i] * out.Sh.values[i] -
                        out.h.values[i] * out.SstarG.values[i] +
                        out.fErr.values[i];
        res = std::max(res, std::abs(f.values[i] - recon));
    }
    out.reconResidual = res;
    return out;
}

struct AwfResult {
    GridFunction g1, h1, g2, h2;
    GridFunction fErr2; // supported in Q, mean zero
    double A = 0;
    double epsA = 0;
    double cert1 = 0, cert2 = 0; // ||gi||inf * ||hi||inf
    double certErr = 0;          // ||fErr2||inf / ||f||inf
    double secondStepErr = 0;    // measured error of the inner step
    double reconResidual = 0;
    std::vector<std::int64_t> qCells, qtCells;
};

struct AwfConfig {
    Ball B;
    Ball partner;
    double A = 0;
    double epsA = 0;
    /// Major subsets: cell lists inside B resp. partner. Empty means the
    /// whole rasterized ball.
    std::vector<std::int64_t> qCells, qtCells;
};

/// Two-step factorization: f (mean zero, supported in Q) is written as
/// sum_i (g_i T h_i - h_i T* g_i) + fErr2 with fErr2 supported in Q and
/// mean zero.
inline AwfResult awfDouble(const KernelSpec& K, const GridFunction& f,
                           const AwfConfig& cfg) {
    const Grid& grid = f.grid;
    auto bCells = cellsIn(grid, cfg.B);
    auto btCells = cellsIn(grid, cfg.partner);
    if (bCells.empty() || btCells.empty()) throw EmptyRegion();
    auto q = cfg.qCells.empty() ? bCells : cfg.qCells;
    auto qt = cfg.qtCells.empty() ? btCells : cfg.qtCells;
    if (4 * q.size() < bCells.size() || 4 * qt.size() < btCells.size())
        throw MajorSubsetTooSmall();
    {
        std::vector<std::uint8_t> inQ(grid.totalCells(), 0);
        for (std::int64_t j : q) inQ[j] = 1;
        for (std::int64_t i : f.supportCells())
            if (!inQ[i]) throw Error("awfDouble: f must be supported in Q");
    }

    AwfResult out;
    out.A = cfg.A;
    out.epsA = cfg.epsA;
    out.qCells = q;
    out.qtCells = qt;
    out.g1 = GridFunction::indicatorCells(grid, qt);
    GridFunction gTilde = GridFunction::indicatorCells(grid, q);

    AwfStep s1 = awfStep(K, f, out.g1, cfg.partner, cfg.A);
    out.h1 = s1.h;
    out.cert1 = s1.certGH;

    AwfStep s2 = awfStep(K.adjoint(), s1.fErr, gTilde, cfg.B, cfg.A);
    out.g2 = s2.h;
    out.g2 *= Complex(-1);
    out.h2 = gTilde;
    out.fErr2 = s2.fErr;
    out.cert2 = out.g2.supNorm() * out.h2.supNorm();
    double fSup = f.supNorm();
    out.certErr = fSup > 0 ? out.fErr2.supNorm() / fSup : 0;
    double ferrSup = s1.fErr.supNorm();
    out.secondStepErr = ferrSup > 0 ? out.fErr2.supNorm() / ferrSup : 0;

    // Cell-wise reconstruction residual of
    //   f = g1 Th1 - h1 T*g1 + g2 Th2 - h2 T*g2 + fErr2.
    // The step objects hold the needed off-support applications:
    //   s1.Sh = T h1, s1.SstarG = T* g1 (step with S = T),
    //   s2.Sh = T* hTilde, s2.SstarG = T gTilde (step with S = T*),
    // and g2 Th2 - h2 T*g2 = -hTilde (T gTilde) + gTilde (T* hTilde).
    double res = 0;
    for (std::int64_t i = 0; i < grid.totalCells(); ++i) {
        Complex t1 = out.g1.values[i] * s1.Sh.values[i] -
                     out.h1.values[i] * s1.SstarG.values[i];
        Complex t2 = -s2.h.values[i] * s2.SstarG.values[i] +
                     gTilde.values[i] * s2.Sh.values[i];
        Complex recon = t1 + t2 + out.fErr2.values[i];
        res = std::max(res, std::abs(f.values[i] - recon));
    }
    out.reconResidual = res;
    return out;
}

/// Iterates the two-step factorization on its own error to exhibit
/// geometric decay of the remainder.
inline std::vector<AwfResult> awfExpand(const KernelSpec& K, const GridFunction& f,
                                        const AwfConfig& cfg, int maxDepth) {
    if (maxDepth < 1) throw Error("awfExpand: maxDepth must be >= 1");
    std::vector<AwfResult> results;
    GridFunction cur = f;
    double prev = f.supNorm();
    for (int j = 0; j < maxDepth; ++j) {
        AwfResult r = awfDouble(K, cur, cfg);
        double e = r.fErr2.supNorm();
        if (prev > 0 && e > 0.9 * prev) throw NoDecay();
        results.push_back(r);
        cur = results.back().fErr2;
        prev = e;
        if (e == 0) break;
    }
    return results;
}

} // namespace czlab
