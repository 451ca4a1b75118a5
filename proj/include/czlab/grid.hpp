#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "czlab/errors.hpp"

namespace czlab {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;
using Index3 = std::array<std::int64_t, 3>;

inline double dist(const Point& a, const Point& b, int dim) {
    double s = 0;
    for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

/// Uniform Cartesian grid on a cubic box [origin, origin + side]^d with
/// n cells per axis (n a power of two). Function values live at cell
/// midpoints; all measures are cell-counted.
struct Grid {
    int dim = 1;                  // 1, 2 or 3
    Point origin{0, 0, 0};        // lower corner
    double side = 1.0;            // box side length (same per axis)
    std::int64_t n = 1;           // cells per axis, power of two

    Grid() = default;
    Grid(int d, Point o, double s, std::int64_t cells)
        : dim(d), origin(o), side(s), n(cells) {
        if (d < 1 || d > 3) throw Error("Grid: dim must be 1, 2 or 3");
        if (s <= 0) throw Error("Grid: side must be positive");
        if (cells < 1 || (cells & (cells - 1)) != 0)
            throw Error("Grid: n must be a power of two");
    }

    double h() const { return side / static_cast<double>(n); }
    double cellMeasure() const { return std::pow(h(), dim); }

    std::int64_t totalCells() const {
        std::int64_t t = 1;
        for (int k = 0; k < dim; ++k) t *= n;
        return t;
    }

    Index3 unflatten(std::int64_t flat) const {
        Index3 idx{0, 0, 0};
        for (int k = dim - 1; k >= 0; --k) {
            idx[k] = flat % n;
            flat /= n;
        }
        return idx;
    }

    std::int64_t flatten(const Index3& idx) const {
        std::int64_t f = 0;
        for (int k = 0; k < dim; ++k) f = f * n + idx[k];
        return f;
    }

    Point midpoint(const Index3& idx) const {
        Point p{0, 0, 0};
        for (int k = 0; k < dim; ++k)
            p[k] = origin[k] + (static_cast<double>(idx[k]) + 0.5) * h();
        return p;
    }

    Point midpoint(std::int64_t flat) const { return midpoint(unflatten(flat)); }

    bool sameAs(const Grid& o) const {
        if (dim != o.dim || n != o.n || side != o.side) return false;
        for (int k = 0; k < dim; ++k)
            if (std::abs(origin[k] - o.origin[k]) > 1e-12 * side) return false;
        return true;
    }

    bool contains(const Point& p) const {
        for (int k = 0; k < dim; ++k)
            if (p[k] < origin[k] || p[k] > origin[k] + side) return false;
        return true;
    }
};

/// Cell-aligned axis cube. generation = dyadic depth relative to some
/// ancestor (bookkeeping only).
struct Cube {
    Point corner{0, 0, 0};
    double side = 1.0;
    int generation = 0;

    Point center(int dim) const {
        Point c = corner;
        for (int k = 0; k < dim; ++k) c[k] += 0.5 * side;
        return c;
    }
    double measure(int dim) const { return std::pow(side, dim); }
    bool containsPoint(const Point& p, int dim) const {
        for (int k = 0; k < dim; ++k)
            if (p[k] < corner[k] || p[k] >= corner[k] + side) return false;
        return true;
    }
};

struct Ball {
    Point center{0, 0, 0};
    double radius = 1.0;
};

using Region = std::variant<Cube, Ball>;

inline bool cellAligned(const Grid& g, const Cube& q, double tol = 1e-9) {
    double h = g.h();
    auto mult = [&](double x) {
        double r = x / h;
        return std::abs(r - std::round(r)) < tol;
    };
    for (int k = 0; k < g.dim; ++k)
        if (!mult(q.corner[k] - g.origin[k])) return false;
    return mult(q.side);
}

/// Cells whose midpoint lies in the region (cube: half-open; ball: closed).
inline std::vector<std::int64_t> cellsIn(const Grid& g, const Region& region) {
    double h = g.h();
    Index3 lo{0, 0, 0}, hi{0, 0, 0}; // inclusive index bounds per axis
    for (int k = 0; k < g.dim; ++k) hi[k] = g.n - 1;

    auto clampAxis = [&](int k, double a, double b) {
        std::int64_t ia = static_cast<std::int64_t>(
            std::floor((a - g.origin[k]) / h - 0.5));
        std::int64_t ib = static_cast<std::int64_t>(
            std::ceil((b - g.origin[k]) / h - 0.5));
        lo[k] = std::max<std::int64_t>(0, ia);
        hi[k] = std::min<std::int64_t>(g.n - 1, ib);
    };

    if (const Cube* q = std::get_if<Cube>(&region)) {
        for (int k = 0; k < g.dim; ++k)
            clampAxis(k, q->corner[k], q->corner[k] + q->side);
    } else {
        const Ball& b = std::get<Ball>(region);
        for (int k = 0; k < g.dim; ++k)
            clampAxis(k, b.center[k] - b.radius, b.center[k] + b.radius);
    }

    std::vector<std::int64_t> out;
    Index3 idx = lo;
    while (true) {
        for (int k = 0; k < g.dim; ++k)
            if (idx[k] > hi[k]) goto done;
        {
            Point m = g.midpoint(idx);
            bool in;
            if (const Cube* q = std::get_if<Cube>(&region))
                in = q->containsPoint(m, g.dim);
            else {
                const Ball& b = std::get<Ball>(region);
                in = dist(m, b.center, g.dim) <= b.radius;
            }
            if (in) out.push_back(g.flatten(idx));
        }
        // advance odometer over [lo, hi]
        {
            int k = g.dim - 1;
            while (k >= 0) {
                if (++idx[k] <= hi[k]) break;
                idx[k] = lo[k];
                --k;
            }
            if (k < 0) break;
        }
    }
done:
    return out;
}

/// Sampled function on a grid with an explicit support mask. Values
/// vanish off support; support is a union of whole cells.
struct GridFunction {
    Grid grid;
    std::vector<Complex> values;
    std::vector<std::uint8_t> support;

    GridFunction() = default;
    explicit GridFunction(const Grid& g)
        : grid(g), values(g.totalCells(), Complex(0)), support(g.totalCells(), 0) {}

    static GridFunction fromFunction(const Grid& g,
                                     const std::function<Complex(Point)>& fn) {
        GridFunction f(g);
        for (std::int64_t i = 0; i < g.totalCells(); ++i) {
            f.values[i] = fn(g.midpoint(i));
            f.support[i] = 1;
        }
        f.tightenSupport();
        return f;
    }

    static GridFunction fromFunctionOn(const Grid& g, const Region& region,
                                       const std::function<Complex(Point)>& fn) {
        GridFunction f(g);
        for (std::int64_t i : cellsIn(g, region)) {
            f.values[i] = fn(g.midpoint(i));
            f.support[i] = 1;
        }
        return f;
    }

    static GridFunction indicator(const Grid& g, const Region& region) {
        return fromFunctionOn(g, region, [](Point) { return Complex(1); });
    }

    static GridFunction indicatorCells(const Grid& g,
                                       const std::vector<std::int64_t>& cells) {
        GridFunction f(g);
        for (std::int64_t i : cells) {
            f.values[i] = Complex(1);
            f.support[i] = 1;
        }
        return f;
    }

    std::vector<std::int64_t> supportCells() const {
        std::vector<std::int64_t> out;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(support.size()); ++i)
            if (support[i]) out.push_back(i);
        return out;
    }

    /// Drop zero cells from the support mask.
    void tightenSupport() {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (support[i] && values[i] == Complex(0)) support[i] = 0;
    }

    bool isReal(double tol = 0.0) const {
        for (const Complex& v : values)
            if (std::abs(v.imag()) > tol) return false;
        return true;
    }

    double supNorm() const {
        double m = 0;
        for (const Complex& v : values) m = std::max(m, std::abs(v));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] += o.values[i];
            support[i] |= o.support[i];
        }
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] -= o.values[i];
            support[i] |= o.support[i];
        }
        return *this;
    }
    GridFunction& operator*=(Complex c) {
        for (auto& v : values) v *= c;
        return *this;
    }
};

inline void requireReal(const GridFunction& f, double tol = 0.0) {
    if (!f.isReal(tol)) throw RealRequired();
}

// ---- quadrature -----------------------------------------------------------

inline Complex integrate(const GridFunction& f) {
    Complex s(0);
    for (std::int64_t i : f.supportCells()) s += f.values[i];
    return s * f.grid.cellMeasure();
}

inline Complex integrate(const GridFunction& f, const Region& region) {
    auto cells = cellsIn(f.grid, region);
    if (cells.empty()) throw EmptyRegion();
    Complex s(0);
    for (std::int64_t i : cells) s += f.values[i];
    return s * f.grid.cellMeasure();
}

/// Cell-counted measure of the rasterized region.
inline double measureOf(const Grid& g, const Region& region) {
    return static_cast<double>(cellsIn(g, region).size()) * g.cellMeasure();
}

inline Complex average(const GridFunction& f, const Region& region) {
    auto cells = cellsIn(f.grid, region);
    if (cells.empty()) throw EmptyRegion();
    Complex s(0);
    for (std::int64_t i : cells) s += f.values[i];
    return s / static_cast<double>(cells.size());
}

inline double lpNorm(const GridFunction& f, double p) {
    if (p < 1) throw Error("lpNorm: p must be >= 1");
    if (std::isinf(p)) return f.supNorm();
    double s = 0;
    for (std::int64_t i : f.supportCells())
        s += std::pow(std::abs(f.values[i]), p);
    return std::pow(s * f.grid.cellMeasure(), 1.0 / p);
}

inline double lpNorm(const GridFunction& f, double p, const Region& region) {
    auto cells = cellsIn(f.grid, region);
    if (cells.empty()) throw EmptyRegion();
    if (std::isinf(p)) {
        double m = 0;
        for (std::int64_t i : cells) m = std::max(m, std::abs(f.values[i]));
        return m;
    }
    double s = 0;
    for (std::int64_t i : cells) s += std::pow(std::abs(f.values[i]), p);
    return std::pow(s * f.grid.cellMeasure(), 1.0 / p);
}

/// Mean oscillation over the region: avg of |b - <b>|.
inline double meanOscillation(const GridFunction& b, const Region& region) {
    auto cells = cellsIn(b.grid, region);
    if (cells.empty()) throw EmptyRegion();
    Complex avg(0);
    for (std::int64_t i : cells) avg += b.values[i];
    avg /= static_cast<double>(cells.size());
    double s = 0;
    for (std::int64_t i : cells) s += std::abs(b.values[i] - avg);
    return s / static_cast<double>(cells.size());
}

/// Lower median of b on the region (cell-counted; deterministic tie-break).
inline double medianOn(const GridFunction& b, const Region& region) {
    auto cells = cellsIn(b.grid, region);
    if (cells.empty()) throw EmptyRegion();
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (std::int64_t i : cells) {
        if (b.values[i].imag() != 0.0) throw RealRequired();
        vals.push_back(b.values[i].real());
    }
    std::size_t k = (vals.size() - 1) / 2; // lower median
    std::nth_element(vals.begin(), vals.begin() + k, vals.end());
    return vals[k];
}

/// Minimal separation (cell midpoints) between the supports of f and g.
inline double supportDistance(const GridFunction& f, const GridFunction& g) {
    auto fc = f.supportCells();
    auto gc = g.supportCells();
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t i : fc) {
        Point a = f.grid.midpoint(i);
        for (std::int64_t j : gc)
            best = std::min(best, dist(a, g.grid.midpoint(j), f.grid.dim));
    }
    return best;
}

/// Default truncation box for a collection of supports: a grid box whose
/// side is 4x the side of the supports' bounding hull, centred on it.
inline Grid boxAround(int dim, const Point& hullLo, const Point& hullHi,
                      std::int64_t n) {
    double maxSide = 0;
    Point c{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
        maxSide = std::max(maxSide, hullHi[k] - hullLo[k]);
        c[k] = 0.5 * (hullLo[k] + hullHi[k]);
    }
    double side = 4.0 * maxSide;
    Point origin{0, 0, 0};
    for (int k = 0; k < dim; ++k) origin[k] = c[k] - 0.5 * side;
    return Grid(dim, origin, side, n);
}

} // namespace czlab
