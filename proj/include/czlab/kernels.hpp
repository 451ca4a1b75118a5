#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "czlab/errors.hpp"
#include "czlab/grid.hpp"
#include "czlab/rng.hpp"

namespace czlab {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Piecewise-constant table for the angular part of a homogeneous kernel.
/// d=1: values at directions -1 and +1. d=2: values on angle intervals
/// [angles[i], angles[i+1]) with angles in [0, 2pi).
struct OmegaTable {
    std::vector<double> angles; // d=2 breakpoints, sorted, empty for d=1
    std::vector<Complex> values;

    Complex eval(int dim, const Point& dir) const {
        if (dim == 1) return dir[0] < 0 ? values[0] : values[1];
        double a = std::atan2(dir[1], dir[0]);
        if (a < 0) a += 2 * kPi;
        std::size_t idx = values.size() - 1;
        for (std::size_t i = 0; i + 1 < angles.size(); ++i)
            if (a >= angles[i] && a < angles[i + 1]) { idx = i; break; }
        return values[idx];
    }
};

enum class KernelVariant { TwoVariable, Homogeneous };

struct KernelSpec {
    KernelVariant variant = KernelVariant::TwoVariable;
    int dim = 1;
    std::string name;

    // TwoVariable
    std::function<Complex(const Point&, const Point&)> evaluator;
    double sizeConstant = 1.0;      // c_K in |K| <= c_K/|x-y|^d
    double lowerConstant = 1.0;     // c0 in the probe threshold
    std::vector<std::pair<double, double>> modulus; // increasing table of omega

    // Homogeneous
    OmegaTable omega;
    Point theta0{1, 0, 0};

    bool adjointFlag = false;

    void validate() const {
        for (std::size_t i = 0; i + 1 < modulus.size(); ++i) {
            if (modulus[i].first >= modulus[i + 1].first ||
                modulus[i].second > modulus[i + 1].second)
                throw Error("KernelSpec: modulus table must be increasing");
        }
        if (variant == KernelVariant::Homogeneous) {
            double n2 = 0;
            for (int k = 0; k < dim; ++k) n2 += theta0[k] * theta0[k];
            if (std::abs(n2 - 1.0) > 1e-9)
                throw Error("KernelSpec: theta0 must be a unit vector");
        }
    }

    KernelSpec adjoint() const {
        KernelSpec k = *this;
        k.adjointFlag = !adjointFlag;
        k.name = name + (k.adjointFlag ? "*" : "");
        return k;
    }
};

inline Complex evalKernel(const KernelSpec& K, const Point& x, const Point& y,
                          double minDist = 0.0) {
    double s = dist(x, y, K.dim);
    if (s < minDist || s == 0.0) throw DiagonalEvaluation();
    const Point& a = K.adjointFlag ? y : x;
    const Point& b = K.adjointFlag ? x : y;
    if (K.variant == KernelVariant::TwoVariable) return K.evaluator(a, b);
    Point dir{0, 0, 0};
    for (int k = 0; k < K.dim; ++k) dir[k] = (a[k] - b[k]) / s;
    return K.omega.eval(K.dim, dir) / std::pow(s, K.dim);
}

// ---- built-ins ------------------------------------------------------------

inline KernelSpec hilbertKernel() {
    KernelSpec k;
    k.variant = KernelVariant::TwoVariable;
    k.dim = 1;
    k.name = "hilbert";
    k.evaluator = [](const Point& x, const Point& y) {
        return Complex(1.0 / (kPi * (x[0] - y[0])));
    };
    k.sizeConstant = 1.0 / kPi;
    k.lowerConstant = 4 * kPi;
    k.modulus = {{0.0, 0.0}, {0.25, 0.5}, {0.5, 1.0}};
    return k;
}

/// c_d = Gamma((d+1)/2) / pi^((d+1)/2), the standard normalization.
inline double rieszNormalization(int d) {
    return std::tgamma(0.5 * (d + 1)) / std::pow(kPi, 0.5 * (d + 1));
}

inline KernelSpec rieszKernel(int j, int d) {
    if (j < 1 || j > d) throw Error("rieszKernel: axis out of range");
    KernelSpec k;
    k.variant = KernelVariant::TwoVariable;
    k.dim = d;
    k.name = "riesz" + std::to_string(j);
    double cd = rieszNormalization(d);
    int axis = j - 1;
    k.evaluator = [cd, axis, d](const Point& x, const Point& y) {
        double s = dist(x, y, d);
        return Complex(cd * (x[axis] - y[axis]) / std::pow(s, d + 1));
    };
    k.sizeConstant = cd;
    k.lowerConstant = 4 * kPi;
    k.modulus = {{0.0, 0.0}, {0.25, 0.5}, {0.5, 1.0}};
    return k;
}

inline KernelSpec ahlforsBeurlingKernel() {
    KernelSpec k;
    k.variant = KernelVariant::TwoVariable;
    k.dim = 2;
    k.name = "ahlfors-beurling";
    k.evaluator = [](const Point& x, const Point& y) {
        Complex z(x[0], x[1]), w(y[0], y[1]);
        Complex dz = z - w;
        return -1.0 / (kPi * dz * dz);
    };
    k.sizeConstant = 1.0 / kPi;
    k.lowerConstant = 4 * kPi;
    k.modulus = {{0.0, 0.0}, {0.25, 0.5}, {0.5, 1.0}};
    return k;
}

inline KernelSpec roughHomogeneousKernel(int d, OmegaTable omega, Point theta0) {
    KernelSpec k;
    k.variant = KernelVariant::Homogeneous;
    k.dim = d;
    k.name = "rough-homogeneous";
    k.omega = std::move(omega);
    k.theta0 = theta0;
    k.lowerConstant = 4 * kPi;
    k.validate();
    return k;
}

/// The adjoint of a homogeneous kernel flips the direction, so the
/// designated Lebesgue point of K* is -theta0. Used by the rough-path
/// median bounds.
inline Point adjointTheta0(const KernelSpec& K) {
    Point t = K.theta0;
    for (int k = 0; k < K.dim; ++k) t[k] = -t[k];
    return t;
}

// ---- non-degeneracy probe -------------------------------------------------

struct ProbeResult {
    double A = 0;
    Point x0{0, 0, 0};
    Ball partner;
    Complex kernelValue{0};
    double epsA = 0;
    std::optional<Complex> sigma; // unit scalar with Re(sigma*K) >= |K0|/2 on partner x base
    double distRatio = 0;         // dist(B, partner) / (A r)
    double sizeC = 0;             // |K0| * (A r)^d
};

namespace detail {

inline std::vector<std::int64_t> sampleCells(const std::vector<std::int64_t>& cells,
                                             std::size_t cap, std::uint64_t stream) {
    if (cells.size() <= cap) return cells;
    CounterRng rng(0x70b3, stream);
    std::vector<std::int64_t> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i)
        out.push_back(cells[rng.index(i, cells.size())]);
    return out;
}

} // namespace detail

inline ProbeResult probeNonDegeneracy(const KernelSpec& K, const Grid& grid,
                                      const Ball& B, double A) {
    if (A < 3) throw Error("probeNonDegeneracy: A must be >= 3");
    double r = B.radius;
    for (int k = 0; k < K.dim; ++k) {
        if (B.center[k] - B.radius - 2 * A * r < grid.origin[k] ||
            B.center[k] + B.radius + 2 * A * r > grid.origin[k] + grid.side)
            throw OutOfGrid();
    }

    const Point& y0 = B.center;
    Point x0{0, 0, 0};
    Complex K0;

    if (K.variant == KernelVariant::Homogeneous) {
        Point t0 = K.adjointFlag ? adjointTheta0(K) : K.theta0;
        for (int k = 0; k < K.dim; ++k) x0[k] = y0[k] + A * r * t0[k];
        K0 = evalKernel(K, x0, y0);
        if (std::abs(K0) < 1.0 / (K.lowerConstant * std::pow(2 * A * r, K.dim)))
            throw NonDegeneracyFailed();
    } else {
        Ball shellOuter{y0, 2 * A * r};
        double best = -1;
        for (std::int64_t i : cellsIn(grid, shellOuter)) {
            Point m = grid.midpoint(i);
            double s = dist(m, y0, K.dim);
            if (s < A * r || s > 2 * A * r) continue;
            double v = std::abs(evalKernel(K, m, y0));
            if (v > best) {
                best = v;
                x0 = m;
            }
        }
        if (best < 1.0 / (K.lowerConstant * std::pow(2 * A * r, K.dim)))
            throw NonDegeneracyFailed();
        K0 = evalKernel(K, x0, y0);
    }

    Ball Bt{x0, r};
    auto bCells = cellsIn(grid, B);
    auto btCells = cellsIn(grid, Bt);
    if (bCells.empty() || btCells.empty()) throw EmptyRegion();

    double hd = grid.cellMeasure();
    double minDist = grid.h() / 2;

    auto bSample = detail::sampleCells(bCells, 4096 >= bCells.size() ? bCells.size() : 256, 1);
    auto btSample = detail::sampleCells(btCells, 4096 >= btCells.size() ? btCells.size() : 256, 2);

    // max over x1 in partner of  int_B |K(x1,y) - K0| dy
    double maxI1 = 0;
    for (std::int64_t i : btSample) {
        Point x1 = grid.midpoint(i);
        double s = 0;
        for (std::int64_t j : bCells)
            s += std::abs(evalKernel(K, x1, grid.midpoint(j), minDist) - K0);
        maxI1 = std::max(maxI1, s * hd);
    }
    // max over y1 in B of  int_partner |K(x,y1) - K0| dx
    double maxI2 = 0;
    for (std::int64_t j : bSample) {
        Point y1 = grid.midpoint(j);
        double s = 0;
        for (std::int64_t i : btCells)
            s += std::abs(evalKernel(K, grid.midpoint(i), y1, minDist) - K0);
        maxI2 = std::max(maxI2, s * hd);
    }

    ProbeResult res;
    res.A = A;
    res.x0 = x0;
    res.partner = Bt;
    res.kernelValue = K0;
    res.epsA = std::pow(A, K.dim) * (maxI1 + maxI2);
    res.distRatio = (dist(x0, y0, K.dim)) / (A * r);
    res.sizeC = std::abs(K0) * std::pow(A * r, K.dim);

    Complex sigma = std::conj(K0) / std::abs(K0);
    double minRe = std::numeric_limits<double>::infinity();
    for (std::int64_t i : btSample)
        for (std::int64_t j : bSample) {
            Complex v = evalKernel(K, grid.midpoint(i), grid.midpoint(j), minDist);
            minRe = std::min(minRe, (sigma * v).real());
        }
    if (minRe >= 0.5 * std::abs(K0)) res.sigma = sigma;
    return res;
}

inline std::pair<double, ProbeResult> chooseA(const KernelSpec& K, const Grid& grid,
                                              const Ball& B, double epsTarget) {
    if (!(epsTarget > 0 && epsTarget < 1))
        throw Error("chooseA: epsTarget must be in (0,1)");
    for (double A = 4; A <= 1024; A *= 2) {
        ProbeResult res;
        try {
            res = probeNonDegeneracy(K, grid, B, A);
        } catch (const OutOfGrid&) {
            throw ATooLargeForGrid();
        }
        if (res.epsA <= epsTarget) return {A, res};
    }
    throw ATooLargeForGrid();
}

} // namespace czlab
