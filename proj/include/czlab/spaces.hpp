#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "czlab/commutator.hpp"
#include "czlab/errors.hpp"
#include "czlab/grid.hpp"
#include "czlab/kernels.hpp"
#include "czlab/rng.hpp"

namespace czlab {

// ---- cube lattice ---------------------------------------------------------

/// All dyadic cubes of the grid with side >= minSideCells cells, together
/// with the 2^d half-shifted copies, restricted to cubes inside the box.
inline std::vector<Cube> cubeLattice(const Grid& g, std::int64_t minSideCells = 4) {
    std::vector<Cube> out;
    double h = g.h();
    for (std::int64_t sideCells = g.n; sideCells >= minSideCells; sideCells /= 2) {
        double side = sideCells * h;
        for (int shiftMask = 0; shiftMask < (1 << g.dim); ++shiftMask) {
            Point shift{0, 0, 0};
            for (int k = 0; k < g.dim; ++k)
                if (shiftMask & (1 << k)) shift[k] = side / 2;
            bool anyShift = shiftMask != 0;
            if (anyShift && sideCells == g.n) continue;
            Index3 counts{1, 1, 1};
            for (int k = 0; k < g.dim; ++k) {
                std::int64_t c = (g.n - (anyShift ? sideCells / 2 : 0)) / sideCells;
                counts[k] = std::max<std::int64_t>(c, 0);
            }
            Index3 idx{0, 0, 0};
            while (true) {
                Cube q;
                q.side = side;
                q.corner = g.origin;
                bool fits = true;
                for (int k = 0; k < g.dim; ++k) {
                    q.corner[k] += shift[k] + idx[k] * side;
                    if (q.corner[k] + side > g.origin[k] + g.side + 1e-9 * h)
                        fits = false;
                }
                if (fits) out.push_back(q);
                int k = g.dim - 1;
                while (k >= 0) {
                    if (++idx[k] < counts[k]) break;
                    idx[k] = 0;
                    --k;
                }
                if (k < 0) break;
            }
        }
    }
    return out;
}

// ---- norms ----------------------------------------------------------------

/// Lattice supremum of the mean oscillation (a certified lower bound of
/// the continuum BMO norm).
inline double bmoNorm(const GridFunction& b, const std::vector<Cube>& lattice) {
    double best = 0;
    for (const Cube& q : lattice)
        best = std::max(best, meanOscillation(b, q));
    return best;
}

/// Sup of |b(x)-b(y)|/|x-y|^alpha over sampled midpoint pairs.
inline double holderSeminorm(const GridFunction& b, double alpha,
                             std::int64_t maxPairs = 1000000) {
    if (!(alpha > 0 && alpha <= 1))
        throw Error("holderSeminorm: alpha must lie in (0,1]");
    const Grid& g = b.grid;
    std::int64_t n = g.totalCells();
    double best = 0;
    auto quotient = [&](std::int64_t i, std::int64_t j) {
        double dd = dist(g.midpoint(i), g.midpoint(j), g.dim);
        if (dd == 0) return 0.0;
        return std::abs(b.values[i] - b.values[j]) / std::pow(dd, alpha);
    };
    if (n * (n - 1) / 2 <= maxPairs) {
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j)
                best = std::max(best, quotient(i, j));
    } else {
        CounterRng rng(0xa1fa, 0);
        for (std::int64_t s = 0; s < maxPairs; ++s) {
            std::int64_t i = static_cast<std::int64_t>(rng.index(2 * s, n));
            std::int64_t j = static_cast<std::int64_t>(rng.index(2 * s + 1, n));
            if (i != j) best = std::max(best, quotient(i, j));
        }
    }
    return best;
}

// ---- oscillation profile and classification -------------------------------

enum class OscClass { BMO, Hoelder, Constant, None };

struct OscillationProfile {
    std::vector<std::pair<double, double>> profile; // (scale, sup oscillation)
    double alphaHat = 0;
    OscClass cls = OscClass::None;
    double slopeMargin = 0.1;
    double constancyThreshold = 1e-8;
};

inline OscillationProfile oscillationClassify(const GridFunction& b,
                                              std::int64_t minSideCells = 4) {
    const Grid& g = b.grid;
    OscillationProfile out;
    auto lattice = cubeLattice(g, minSideCells);
    std::vector<double> scales;
    for (const Cube& q : lattice) {
        bool seen = false;
        for (std::size_t i = 0; i < scales.size(); ++i)
            if (std::abs(scales[i] - q.side) < 1e-12) {
                out.profile[i].second =
                    std::max(out.profile[i].second, meanOscillation(b, q));
                seen = true;
            }
        if (!seen) {
            scales.push_back(q.side);
            out.profile.push_back({q.side, meanOscillation(b, q)});
        }
    }
    if (out.profile.size() < 4) throw TooFewScales();

    double bSup = b.supNorm();
    bool allTiny = true;
    for (auto& [s, v] : out.profile)
        if (v > out.constancyThreshold * std::max(bSup, 1e-300)) allTiny = false;
    if (allTiny) {
        out.cls = OscClass::Constant;
        return out;
    }

    // least-squares slope of log(osc) against log(scale)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (auto& [s, v] : out.profile) {
        if (v <= 0) continue;
        double x = std::log(s), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 4) throw TooFewScales();
    out.alphaHat = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (std::abs(out.alphaHat) <= out.slopeMargin)
        out.cls = OscClass::BMO;
    else if (out.alphaHat > out.slopeMargin && out.alphaHat <= 1.0 + out.slopeMargin)
        out.cls = OscClass::Hoelder;
    else
        out.cls = OscClass::None;
    return out;
}

// ---- weights --------------------------------------------------------------

inline void requirePositive(const GridFunction& w) {
    for (const Complex& v : w.values)
        if (v.imag() != 0.0 || v.real() <= 0) throw NonPositiveWeight();
}

inline GridFunction dualWeight(const GridFunction& w, double p) {
    if (!(p > 1 && std::isfinite(p))) throw Error("dualWeight: p must be in (1, inf)");
    requirePositive(w);
    GridFunction out = w;
    for (auto& v : out.values) v = std::pow(v.real(), -1.0 / (p - 1));
    return out;
}

inline double apCharacteristic(const GridFunction& w, double p,
                               const std::vector<Cube>& lattice) {
    if (!(p > 1 && std::isfinite(p)))
        throw Error("apCharacteristic: p must be in (1, inf)");
    requirePositive(w);
    GridFunction dual = dualWeight(w, p);
    double best = 0;
    for (const Cube& q : lattice) {
        double a = average(w, q).real();
        double ad = average(dual, q).real();
        best = std::max(best, a * std::pow(ad, p - 1));
    }
    return best;
}

struct WeightTriple {
    GridFunction mu, lambda;
    double p = 2;
    GridFunction nu;          // (mu/lambda)^(1/p)
    GridFunction muDual;      // mu^(-1/(p-1))
    GridFunction lambdaDual;  // lambda^(-1/(p-1))
    double muAp = 0, lambdaAp = 0;

    WeightTriple(GridFunction mu_, GridFunction lambda_, double p_,
                 const std::vector<Cube>& lattice)
        : mu(std::move(mu_)), lambda(std::move(lambda_)), p(p_) {
        requirePositive(mu);
        requirePositive(lambda);
        nu = mu;
        for (std::size_t i = 0; i < nu.values.size(); ++i)
            nu.values[i] = std::pow(mu.values[i].real() / lambda.values[i].real(),
                                    1.0 / p);
        muDual = dualWeight(mu, p);
        lambdaDual = dualWeight(lambda, p);
        muAp = apCharacteristic(mu, p, lattice);
        lambdaAp = apCharacteristic(lambda, p, lattice);
    }
};

/// sup_B (1 / nu^(1/k)(B)) int_B |b - <b>_B| over the lattice; with
/// nu identically 1 this equals the plain BMO lattice norm.
inline double bloomBmoNorm(const GridFunction& b, const GridFunction& nu, int k,
                           const std::vector<Cube>& lattice) {
    requirePositive(nu);
    if (k < 1) throw Error("bloomBmoNorm: k must be >= 1");
    const Grid& g = b.grid;
    double best = 0;
    for (const Cube& q : lattice) {
        auto cells = cellsIn(g, q);
        if (cells.empty()) continue;
        Complex avg(0);
        for (std::int64_t i : cells) avg += b.values[i];
        avg /= static_cast<double>(cells.size());
        double osc = 0, mass = 0;
        for (std::int64_t i : cells) {
            osc += std::abs(b.values[i] - avg);
            mass += std::pow(nu.values[i].real(), 1.0 / k);
        }
        if (mass > 0) best = std::max(best, osc / mass);
    }
    return best;
}

struct BasicApReport {
    double lhs = 0; // mu(B)^(1/p) lambda'(partner)^(1/p')
    double rhs = 0; // <nu^(1/k)>_B^k |B|
    double constant = 0;
};

inline BasicApReport basicApCheck(const WeightTriple& wt, int k, const Ball& B,
                                  const Ball& partner) {
    const Grid& g = wt.mu.grid;
    auto bc = cellsIn(g, B);
    auto pc = cellsIn(g, partner);
    if (bc.empty() || pc.empty()) throw EmptyRegion();
    double hd = g.cellMeasure();
    double muB = 0;
    double nuAvg = 0;
    for (std::int64_t i : bc) {
        muB += wt.mu.values[i].real();
        nuAvg += std::pow(wt.nu.values[i].real(), 1.0 / k);
    }
    muB *= hd;
    nuAvg /= static_cast<double>(bc.size());
    double lamDual = 0;
    for (std::int64_t i : pc) lamDual += wt.lambdaDual.values[i].real();
    lamDual *= hd;
    double pp = wt.p / (wt.p - 1);
    BasicApReport rep;
    rep.lhs = std::pow(muB, 1 / wt.p) * std::pow(lamDual, 1 / pp);
    rep.rhs = std::pow(nuAvg, k) * static_cast<double>(bc.size()) * hd;
    rep.constant = rep.rhs > 0 ? rep.lhs / rep.rhs
                               : std::numeric_limits<double>::infinity();
    return rep;
}

// ---- median-method lower bounds -------------------------------------------

struct PowerDeviation {
    double cStar = 0;
    double value = 0; // int_region |b - cStar|^k
};

/// Minimizes c -> int_region |b - c|^k by ternary search over the value
/// range; the map is convex for k >= 1.
inline PowerDeviation infPowerDeviation(const GridFunction& b, const Region& region,
                                        int k) {
    if (k < 1) throw Error("infPowerDeviation: k must be >= 1");
    const Grid& g = b.grid;
    auto cells = cellsIn(g, region);
    if (cells.empty()) throw EmptyRegion();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::int64_t i : cells) {
        if (b.values[i].imag() != 0.0) throw RealRequired();
        lo = std::min(lo, b.values[i].real());
        hi = std::max(hi, b.values[i].real());
    }
    auto objective = [&](double c) {
        double s = 0;
        for (std::int64_t i : cells)
            s += std::pow(std::abs(b.values[i].real() - c), k);
        return s * g.cellMeasure();
    };
    double span = hi - lo;
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(span, 1e-300); ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (objective(m1) <= objective(m2))
            hi = m2;
        else
            lo = m1;
    }
    PowerDeviation out;
    out.cStar = 0.5 * (lo + hi);
    out.value = objective(out.cStar);
    return out;
}

struct MedianWitness {
    std::vector<std::int64_t> fCells; // E_i
    std::vector<std::int64_t> gCells; // partner-side set
    bool adjointRole = false;
    Complex pairingValue{0};
};

struct MedianBound {
    double lhs = 0;         // inf_c int_B |b-c|^k
    double sumPairings = 0; // sum of |<1_{E-tilde}, T_b^k 1_E>|
    double ratio = 0;
    bool boundHolds = false;
    double reportConstant = 0;
    std::vector<MedianWitness> witnesses;
    ProbeResult probe;
};

/// Median-method lower bound: splits B and the probed partner ball by a
/// median of b and pairs the resulting level sets through the order-k
/// form. The rough (homogeneous) path adds the two adjoint-role pairs.
inline MedianBound medianLowerBound(const GridFunction& b, const KernelSpec& K,
                                    int k, const Ball& B, double A,
                                    double reportConstant = 0) {
    const Grid& g = b.grid;
    requireReal(b);
    MedianBound out;
    out.probe = probeNonDegeneracy(K, g, B, A);
    const Ball& Bt = out.probe.partner;
    out.reportConstant =
        reportConstant > 0 ? reportConstant : 100 * std::pow(A, g.dim);

    auto levelSets = [&](const Ball& base, double cut, bool upper) {
        std::vector<std::int64_t> out_;
        for (std::int64_t i : cellsIn(g, base)) {
            double v = b.values[i].real();
            if ((upper && v >= cut) || (!upper && v <= cut)) out_.push_back(i);
        }
        return out_;
    };

    double alpha = medianOn(b, Bt);
    out.witnesses.push_back({levelSets(B, alpha, true), levelSets(Bt, alpha, false),
                             false, Complex(0)});
    out.witnesses.push_back({levelSets(B, alpha, false), levelSets(Bt, alpha, true),
                             false, Complex(0)});
    if (K.variant == KernelVariant::Homogeneous) {
        double beta = medianOn(b, B);
        out.witnesses.push_back({levelSets(Bt, beta, true),
                                 levelSets(B, beta, false), true, Complex(0)});
        out.witnesses.push_back({levelSets(Bt, beta, false),
                                 levelSets(B, beta, true), true, Complex(0)});
    }

    for (MedianWitness& w : out.witnesses) {
        if (w.fCells.empty() || w.gCells.empty()) continue;
        GridFunction f = GridFunction::indicatorCells(g, w.fCells);
        GridFunction gg = GridFunction::indicatorCells(g, w.gCells);
        KernelSpec op = w.adjointRole ? K.adjoint() : K;
        w.pairingValue = pairing(b, op, k, f, gg);
        out.sumPairings += std::abs(w.pairingValue);
    }

    out.lhs = infPowerDeviation(b, B, k).value;
    if (out.sumPairings > 0) {
        out.ratio = out.lhs / out.sumPairings;
        out.boundHolds = out.ratio <= out.reportConstant;
    } else {
        double scale = std::pow(std::max(b.supNorm(), 1e-300), k) *
                       measureOf(g, B);
        if (out.lhs <= 1e-10 * scale) {
            out.ratio = 0;
            out.boundHolds = true;
        } else {
            throw DegenerateMedian();
        }
    }
    return out;
}

} // namespace czlab
