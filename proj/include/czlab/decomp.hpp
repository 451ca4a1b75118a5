#pragma once

#include <cmath>
#include <vector>

#include "czlab/errors.hpp"
#include "czlab/grid.hpp"

namespace czlab {

namespace detail {

inline std::vector<Cube> dyadicChildren(const Cube& q, int dim, double h) {
    std::vector<Cube> out;
    if (q.side / 2 < h * (1 - 1e-9)) return out;
    int count = 1 << dim;
    for (int mask = 0; mask < count; ++mask) {
        Cube c;
        c.side = q.side / 2;
        c.generation = q.generation + 1;
        c.corner = q.corner;
        for (int k = 0; k < dim; ++k)
            if (mask & (1 << k)) c.corner[k] += c.side;
        out.push_back(c);
    }
    return out;
}

inline double avgAbsOn(const GridFunction& f, const std::vector<std::int64_t>& cells) {
    double s = 0;
    for (std::int64_t i : cells) s += std::abs(f.values[i]);
    return s / static_cast<double>(cells.size());
}

inline Complex avgOn(const GridFunction& f, const std::vector<std::int64_t>& cells) {
    Complex s(0);
    for (std::int64_t i : cells) s += f.values[i];
    return s / static_cast<double>(cells.size());
}

} // namespace detail

// ---- stopping-time decomposition ------------------------------------------

struct StoppingNode {
    Cube cube;
    int level = 0;          // family index
    int parent = -1;        // index into nodes, -1 for the root
    std::vector<int> children;
    Complex avg{0};
    double avgAbs = 0;
    GridFunction piece;     // mean zero on cube
    std::vector<std::int64_t> stoppingSet; // E(F) = F minus selected children
};

struct StoppingTree {
    Cube root;
    std::vector<StoppingNode> nodes; // nodes[0] is the root
    int levels = 0;
};

/// Splits f over the maximal dyadic subcubes where the average of |f|
/// more than doubles; pieces sum to f exactly and each is mean zero on
/// its cube.
inline StoppingTree czStopping(const GridFunction& f, const Cube& q0) {
    const Grid& grid = f.grid;
    if (!cellAligned(grid, q0)) throw Error("czStopping: root cube not cell-aligned");
    auto rootCells = cellsIn(grid, q0);
    if (rootCells.empty()) throw EmptyRegion();
    {
        Complex s(0);
        for (std::int64_t i : rootCells) s += f.values[i];
        double scale = std::max(1.0, f.supNorm() *
                                         static_cast<double>(rootCells.size()) *
                                         grid.cellMeasure());
        if (std::abs(s) * grid.cellMeasure() > 1e-12 * scale) throw NotMeanZero();
    }

    StoppingTree tree;
    tree.root = q0;

    struct Work {
        Cube cube;
        int level;
        int parent;
    };
    std::vector<Work> queue{{q0, 0, -1}};

    while (!queue.empty()) {
        Work w = queue.back();
        queue.pop_back();
        StoppingNode node;
        node.cube = w.cube;
        node.level = w.level;
        node.parent = w.parent;
        auto cells = cellsIn(grid, w.cube);
        node.avg = detail::avgOn(f, cells);
        node.avgAbs = detail::avgAbsOn(f, cells);
        int myIdx = static_cast<int>(tree.nodes.size());
        if (w.parent >= 0) tree.nodes[w.parent].children.push_back(myIdx);
        tree.levels = std::max(tree.levels, w.level + 1);

        // maximal strict dyadic subcubes whose |f|-average more than
        // doubles the average on this cube
        std::vector<Cube> selected;
        std::vector<Cube> stack = detail::dyadicChildren(w.cube, grid.dim, grid.h());
        while (!stack.empty()) {
            Cube c = stack.back();
            stack.pop_back();
            auto cc = cellsIn(grid, c);
            if (cc.empty()) continue;
            if (detail::avgAbsOn(f, cc) > 2 * node.avgAbs) {
                selected.push_back(c);
            } else {
                for (Cube& ch : detail::dyadicChildren(c, grid.dim, grid.h()))
                    stack.push_back(ch);
            }
        }

        // stopping set and piece
        std::vector<std::uint8_t> inChild(grid.totalCells(), 0);
        std::vector<Complex> childAvg;
        std::vector<std::vector<std::int64_t>> childCells;
        for (const Cube& c : selected) {
            childCells.push_back(cellsIn(grid, c));
            childAvg.push_back(detail::avgOn(f, childCells.back()));
            for (std::int64_t i : childCells.back()) inChild[i] = 1;
        }
        node.piece = GridFunction(grid);
        for (std::int64_t i : cells) {
            Complex v = -node.avg;
            if (inChild[i]) {
                for (std::size_t j = 0; j < selected.size(); ++j)
                    if (selected[j].containsPoint(grid.midpoint(i), grid.dim)) {
                        v += childAvg[j];
                        break;
                    }
            } else {
                v += f.values[i];
                node.stoppingSet.push_back(i);
            }
            node.piece.values[i] = v;
            node.piece.support[i] = 1;
        }
        tree.nodes.push_back(node);
        for (const Cube& c : selected) queue.push_back({c, w.level + 1, myIdx});
    }
    return tree;
}

// ---- Lerner-type sparse family --------------------------------------------

struct SparseCube {
    Cube cube;
    double oscillation = 0; // mean oscillation of b over the cube
    std::vector<std::int64_t> majorSubset; // E(Q), disjoint across the family
    std::vector<int> children;             // selected subcubes
    int parent = -1;
};

struct SparseFamily {
    Cube root;
    std::vector<SparseCube> cubes; // cubes[0] is the root
    double dominationConstant = 0; // measured sup of lhs/rhs over cells
};

/// Sparse family with the selection rule: maximal dyadic Q with
/// avg_Q |b - <b>_parentRoot| > 2 avg_parentRoot |b - <b>_parentRoot|,
/// recursed. Satisfies |E(Q)| >= |Q|/2 and the pointwise domination
///   |b - <b>_Q0| <= 2^(d+2) sum_Q 1_Q osc(Q)  on every cell.
inline SparseFamily lernerSparse(const GridFunction& b, const Cube& q0) {
    const Grid& grid = b.grid;
    if (!cellAligned(grid, q0)) throw Error("lernerSparse: root cube not cell-aligned");
    if (cellsIn(grid, q0).empty()) throw EmptyRegion();

    SparseFamily fam;
    fam.root = q0;

    struct Work {
        Cube cube;
        int parent;
    };
    std::vector<Work> queue{{q0, -1}};
    while (!queue.empty()) {
        Work w = queue.back();
        queue.pop_back();
        SparseCube sc;
        sc.cube = w.cube;
        sc.parent = w.parent;
        auto cells = cellsIn(grid, w.cube);
        Complex avg = detail::avgOn(b, cells);
        double osc = 0;
        for (std::int64_t i : cells) osc += std::abs(b.values[i] - avg);
        osc /= static_cast<double>(cells.size());
        sc.oscillation = osc;
        int myIdx = static_cast<int>(fam.cubes.size());
        if (w.parent >= 0) fam.cubes[w.parent].children.push_back(myIdx);

        std::vector<Cube> selected;
        if (osc > 0) {
            std::vector<Cube> stack = detail::dyadicChildren(w.cube, grid.dim, grid.h());
            while (!stack.empty()) {
                Cube c = stack.back();
                stack.pop_back();
                auto cc = cellsIn(grid, c);
                if (cc.empty()) continue;
                double dev = 0;
                for (std::int64_t i : cc) dev += std::abs(b.values[i] - avg);
                dev /= static_cast<double>(cc.size());
                if (dev > 2 * osc) {
                    selected.push_back(c);
                } else {
                    for (Cube& ch : detail::dyadicChildren(c, grid.dim, grid.h()))
                        stack.push_back(ch);
                }
            }
        }
        std::vector<std::uint8_t> inChild(grid.totalCells(), 0);
        for (const Cube& c : selected)
            for (std::int64_t i : cellsIn(grid, c)) inChild[i] = 1;
        for (std::int64_t i : cells)
            if (!inChild[i]) sc.majorSubset.push_back(i);
        fam.cubes.push_back(sc);
        for (const Cube& c : selected) queue.push_back({c, myIdx});
    }

    // measure the pointwise domination constant over the root
    Complex rootAvg = detail::avgOn(b, cellsIn(grid, q0));
    double worst = 0;
    for (std::int64_t i : cellsIn(grid, q0)) {
        Point m = grid.midpoint(i);
        double lhs = std::abs(b.values[i] - rootAvg);
        double rhs = 0;
        for (const SparseCube& sc : fam.cubes)
            if (sc.cube.containsPoint(m, grid.dim)) rhs += sc.oscillation;
        if (lhs > 0) worst = std::max(worst, rhs > 0 ? lhs / rhs
                                                     : std::numeric_limits<double>::infinity());
    }
    fam.dominationConstant = worst;
    return fam;
}

// ---- Doob-type cube comparison --------------------------------------------

struct DoobReport {
    double lhs = 0;
    double rhs = 0;
    double ratio = 0;
    bool flagged = false;
};

inline DoobReport doobCheck(const Grid& grid, const std::vector<Cube>& cubes,
                            const std::vector<std::vector<std::int64_t>>& subsets,
                            const std::vector<double>& lambda, double p, double eta,
                            double flagThreshold = 0) {
    if (cubes.size() != subsets.size() || cubes.size() != lambda.size())
        throw Error("doobCheck: mismatched inputs");
    if (p < 1 || !std::isfinite(p)) throw Error("doobCheck: p must be in [1, inf)");
    GridFunction qStack(grid), eStack(grid);
    for (std::size_t k = 0; k < cubes.size(); ++k) {
        if (lambda[k] < 0) throw Error("doobCheck: coefficients must be nonnegative");
        auto qc = cellsIn(grid, cubes[k]);
        if (static_cast<double>(subsets[k].size()) <
            eta * static_cast<double>(qc.size()) - 1e-9)
            throw EtaViolated();
        for (std::int64_t i : qc) {
            qStack.values[i] += lambda[k];
            qStack.support[i] = 1;
        }
        for (std::int64_t i : subsets[k]) {
            eStack.values[i] += lambda[k];
            eStack.support[i] = 1;
        }
    }
    DoobReport rep;
    rep.lhs = lpNorm(qStack, p);
    rep.rhs = lpNorm(eStack, p);
    rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : (rep.lhs > 0
                    ? std::numeric_limits<double>::infinity() : 0);
    double threshold = flagThreshold > 0 ? flagThreshold : 4 / eta;
    rep.flagged = rep.ratio > threshold;
    return rep;
}

// ---- global constant extraction -------------------------------------------

struct ExtractReport {
    double c = 0;
    GridFunction a;
    double aNormR = 0;
    std::vector<double> increments; // |<b>_{Q_{m+1}} - <b>_{Q_m}|
    std::vector<double> tailBounds; // 2 Theta |Q_m|^{-1/r}
    bool decayHolds = true;
};

/// Splits b = a + c with c the average over the largest cube; checks the
/// Cauchy increments of the cube averages against the r-norm tail bound.
inline ExtractReport extractConstant(const GridFunction& b,
                                     const std::vector<Cube>& nested, double r) {
    if (nested.size() < 3) throw Error("extractConstant: need at least 3 nested cubes");
    const Grid& grid = b.grid;
    requireReal(b);

    std::vector<double> avgs;
    std::vector<double> devNorms; // ||b - <b>_{Q_m}||_{L^r(Q_m)}
    std::vector<double> measures;
    for (const Cube& q : nested) {
        auto cells = cellsIn(grid, q);
        if (cells.empty()) throw EmptyRegion();
        double avg = detail::avgOn(b, cells).real();
        double s = 0;
        for (std::int64_t i : cells)
            s += std::pow(std::abs(b.values[i].real() - avg), r);
        avgs.push_back(avg);
        devNorms.push_back(std::pow(s * grid.cellMeasure(), 1 / r));
        measures.push_back(static_cast<double>(cells.size()) * grid.cellMeasure());
    }
    double theta = 0;
    for (double v : devNorms) theta = std::max(theta, v);

    ExtractReport rep;
    rep.c = avgs.back();
    rep.a = b;
    for (std::int64_t i = 0; i < grid.totalCells(); ++i) {
        rep.a.values[i] -= rep.c;
        rep.a.support[i] = 1;
    }
    rep.a.tightenSupport();
    rep.aNormR = lpNorm(rep.a, r, nested.back());
    for (std::size_t m = 0; m + 1 < avgs.size(); ++m) {
        double inc = std::abs(avgs[m + 1] - avgs[m]);
        double bound = 2 * theta * std::pow(measures[m], -1 / r);
        rep.increments.push_back(inc);
        rep.tailBounds.push_back(bound);
        if (inc > bound + 1e-12) rep.decayHolds = false;
    }
    return rep;
}

} // namespace czlab
