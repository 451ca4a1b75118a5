#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "czlab/errors.hpp"
#include "czlab/grid.hpp"
#include "czlab/kernels.hpp"
#include "czlab/parallel.hpp"

namespace czlab {

struct ExponentConfig {
    double p = 2;
    double q = 2;
    int k = 1;
    int dim = 1;

    ExponentConfig(double p_, double q_, int k_, int dim_)
        : p(p_), q(q_), k(k_), dim(dim_) {
        if (!(p > 1 && std::isfinite(p)) || !(q > 1 && std::isfinite(q)))
            throw Error("ExponentConfig: p, q must lie in (1, infinity)");
        if (k < 0) throw Error("ExponentConfig: order k must be >= 0");
    }

    double pPrime() const { return p / (p - 1); }
    double qPrime() const { return q / (q - 1); }
    /// Smoothness exponent alpha = (d/k)(1/p - 1/q), defined when p <= q.
    double alpha() const {
        if (p > q) throw Error("alpha defined only for p <= q");
        return (static_cast<double>(dim) / std::max(k, 1)) * (1 / p - 1 / q);
    }
    /// Off-diagonal exponent r = pq/(p-q), defined when p > q.
    double rOffDiag() const {
        if (p <= q) throw Error("r defined only for p > q");
        return p * q / (p - q);
    }
    /// Sobolev threshold: (1/p - k/d)_+^{-1}, infinity when 1/p <= k/d.
    double sobolevThreshold() const {
        double t = 1 / p - static_cast<double>(k) / dim;
        return t > 0 ? 1 / t : std::numeric_limits<double>::infinity();
    }
};

inline void checkSeparated(const GridFunction& f, const GridFunction& g,
                           double minSep) {
    for (std::size_t i = 0; i < f.support.size(); ++i)
        if (f.support[i] && g.support[i]) throw SupportsOverlap();
    double sep = supportDistance(f, g);
    if (sep < minSep) throw SupportsTouching();
}

/// The off-support bilinear form of the k-th order commutator:
///   h^{2d} sum_x sum_y (b(x)-b(y))^k K(x,y) f(y) conj-free g(x).
/// Real b is required for k >= 2; complex b is allowed for k in {0,1}.
inline Complex pairing(const GridFunction& b, const KernelSpec& K, int k,
                       const GridFunction& f, const GridFunction& g) {
    if (k < 0) throw Error("pairing: order must be >= 0");
    if (k >= 2) requireReal(b);
    const Grid& grid = f.grid;
    checkSeparated(f, g, 2 * grid.h());
    auto fCells = f.supportCells();
    auto gCells = g.supportCells();
    double minDist = grid.h() / 2;
    Complex s = parallelSum(
        static_cast<std::int64_t>(gCells.size()), [&](std::int64_t gi) {
            std::int64_t xi = gCells[gi];
            Point x = grid.midpoint(xi);
            Complex bx = b.values[xi];
            Complex acc(0);
            for (std::int64_t yi : fCells) {
                Point y = grid.midpoint(yi);
                Complex w = (k == 0) ? Complex(1)
                                     : std::pow(bx - b.values[yi], k);
                acc += w * evalKernel(K, x, y, minDist) * f.values[yi];
            }
            return acc * g.values[xi];
        });
    return s * grid.cellMeasure() * grid.cellMeasure();
}

inline GridFunction applyOffSupportCells(const KernelSpec& K, const GridFunction& f,
                                         const std::vector<std::int64_t>& tCells);

/// (Tf)(x) for x in the target region, which must be separated from supp f.
inline GridFunction applyOffSupport(const KernelSpec& K, const GridFunction& f,
                                    const Region& target) {
    auto tCells = cellsIn(f.grid, target);
    if (tCells.empty()) throw EmptyRegion();
    return applyOffSupportCells(K, f, tCells);
}

/// (Tf) evaluated on an explicit cell list, which must be separated from
/// supp f by at least 2h.
inline GridFunction applyOffSupportCells(const KernelSpec& K, const GridFunction& f,
                                         const std::vector<std::int64_t>& tCells) {
    const Grid& grid = f.grid;
    auto fCells = f.supportCells();
    double h = grid.h();
    for (std::int64_t ti : tCells) {
        if (f.support[ti]) throw SupportsOverlap();
        Point x = grid.midpoint(ti);
        for (std::int64_t yi : fCells)
            if (dist(x, grid.midpoint(yi), grid.dim) < 2 * h)
                throw SupportsOverlap();
    }
    GridFunction out(grid);
    double minDist = h / 2;
    parallelFor(static_cast<std::int64_t>(tCells.size()), [&](std::int64_t i) {
        std::int64_t ti = tCells[i];
        Point x = grid.midpoint(ti);
        Complex acc(0);
        for (std::int64_t yi : fCells)
            acc += evalKernel(K, x, grid.midpoint(yi), minDist) * f.values[yi];
        out.values[ti] = acc * grid.cellMeasure();
        out.support[ti] = 1;
    });
    return out;
}

// ---- Theta lower-bound estimators ----------------------------------------

enum class ThetaMode { Single, Multi, Weighted };

struct ThetaSamplePair {
    Ball B;
    Ball partner;
    double scale = 0;
    double position = 0;
};

struct PairSampler {
    std::vector<ThetaSamplePair> pairs;
    /// Required separation: dist(B, partner) >= max(2h, sepFactor * r).
    double sepFactor = 0.5;
};

struct ThetaWitness {
    double scale = 0;
    double position = 0;
    Complex pairingValue{0};
    double normalizer = 0;
    double ratio = 0;
    std::string variant; // which test-function pair achieved it
};

struct ThetaEstimate {
    double value = 0;
    ThetaMode mode = ThetaMode::Single;
    std::vector<ThetaWitness> witnesses;
};

/// Weights for the Weighted mode: mu on the f-side ball, dual lambda' on
/// the g-side ball.
struct ThetaWeights {
    const GridFunction* mu = nullptr;
    const GridFunction* lambdaPrime = nullptr;
};

namespace detail {

/// Two-block test function: +1 where b >= its median on the region, -1
/// below. Mirrors the median-method witnesses.
inline GridFunction signedBlock(const GridFunction& b, const Grid& grid,
                                const Ball& ball) {
    double med = medianOn(b, ball);
    GridFunction f(grid);
    for (std::int64_t i : cellsIn(grid, ball)) {
        f.values[i] = (b.values[i].real() >= med) ? Complex(1) : Complex(-1);
        f.support[i] = 1;
    }
    return f;
}

inline double weightMass(const GridFunction& w, const Grid& grid, const Ball& ball) {
    double s = 0;
    for (std::int64_t i : cellsIn(grid, ball)) s += w.values[i].real();
    return s * grid.cellMeasure();
}

} // namespace detail

inline ThetaEstimate thetaLowerBound(const GridFunction& b, const KernelSpec& K,
                                     const ExponentConfig& cfg, ThetaMode mode,
                                     const PairSampler& sampler,
                                     const ThetaWeights& weights = {}) {
    if (sampler.pairs.empty()) throw EmptySampler();
    if (mode == ThetaMode::Multi && cfg.p <= cfg.q)
        throw Error("Multi mode requires p > q");
    if (mode == ThetaMode::Weighted && (!weights.mu || !weights.lambdaPrime))
        throw Error("Weighted mode requires mu and lambdaPrime");
    const Grid& grid = b.grid;
    double h = grid.h();

    ThetaEstimate est;
    est.mode = mode;

    struct PerPair {
        Complex pairingValue{0};
        double fSup = 0, gSup = 0;
        GridFunction f, g;
        std::string variant;
    };
    std::vector<PerPair> chosen;

    for (const ThetaSamplePair& sp : sampler.pairs) {
        double minSep = std::max(2 * h, sampler.sepFactor * sp.B.radius);
        GridFunction indF = GridFunction::indicator(grid, sp.B);
        GridFunction indG = GridFunction::indicator(grid, sp.partner);
        checkSeparated(indF, indG, minSep);
        GridFunction sgnF = detail::signedBlock(b, grid, sp.B);
        GridFunction sgnG = detail::signedBlock(b, grid, sp.partner);

        struct Cand {
            const GridFunction* f;
            const GridFunction* g;
            const char* tag;
        };
        std::vector<Cand> cands = {{&indF, &indG, "ind/ind"},
                                   {&sgnF, &indG, "sgn/ind"},
                                   {&indF, &sgnG, "ind/sgn"},
                                   {&sgnF, &sgnG, "sgn/sgn"}};

        PerPair best;
        double bestAbs = -1;
        for (const Cand& c : cands) {
            Complex v = pairing(b, K, cfg.k, *c.f, *c.g);
            if (std::abs(v) > bestAbs) {
                bestAbs = std::abs(v);
                best.pairingValue = v;
                best.f = *c.f;
                best.g = *c.g;
                best.fSup = 1.0;
                best.gSup = 1.0;
                best.variant = c.tag;
            }
        }

        double normalizer = 0;
        if (mode == ThetaMode::Single) {
            double mB = measureOf(grid, sp.B);
            double mBt = measureOf(grid, sp.partner);
            normalizer = best.fSup * std::pow(mB, 1 / cfg.p) * best.gSup *
                         std::pow(mBt, 1 / cfg.qPrime());
        } else if (mode == ThetaMode::Weighted) {
            double muB = detail::weightMass(*weights.mu, grid, sp.B);
            double lpBt = detail::weightMass(*weights.lambdaPrime, grid, sp.partner);
            normalizer = best.fSup * std::pow(muB, 1 / cfg.p) * best.gSup *
                         std::pow(lpBt, 1 / cfg.pPrime());
        }

        if (mode != ThetaMode::Multi) {
            double ratio = normalizer > 0 ? std::abs(best.pairingValue) / normalizer : 0;
            est.witnesses.push_back({sp.scale, sp.position, best.pairingValue,
                                     normalizer, ratio, best.variant});
            est.value = std::max(est.value, ratio);
        } else {
            chosen.push_back(std::move(best));
            est.witnesses.push_back({sp.scale, sp.position, chosen.back().pairingValue,
                                     0, 0, chosen.back().variant});
        }
    }

    if (mode == ThetaMode::Multi) {
        GridFunction fStack(grid), gStack(grid);
        double sumAbs = 0;
        for (PerPair& pp : chosen) {
            sumAbs += std::abs(pp.pairingValue);
            for (std::int64_t i : pp.f.supportCells()) {
                fStack.values[i] += pp.fSup;
                fStack.support[i] = 1;
            }
            for (std::int64_t i : pp.g.supportCells()) {
                gStack.values[i] += pp.gSup;
                gStack.support[i] = 1;
            }
        }
        double den = lpNorm(fStack, cfg.p) * lpNorm(gStack, cfg.qPrime());
        est.value = den > 0 ? sumAbs / den : 0;
        for (ThetaWitness& w : est.witnesses) {
            w.normalizer = den;
            w.ratio = est.value;
        }
    }
    return est;
}

} // namespace czlab
