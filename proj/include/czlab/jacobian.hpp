#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <vector>

#include "czlab/errors.hpp"
#include "czlab/grid.hpp"
#include "czlab/kernels.hpp"
#include "czlab/rng.hpp"

namespace czlab {

// ---- vector fields and the discrete Jacobian ------------------------------

struct VectorField {
    std::vector<GridFunction> comp; // one per dimension

    const Grid& grid() const { return comp.at(0).grid; }
    int dim() const { return static_cast<int>(comp.size()); }
};

namespace detail {

/// Central difference along an axis; one-sided never needed because the
/// callers guarantee either compact support or periodicity.
inline GridFunction centralDiff(const GridFunction& f, int axis, bool periodic) {
    const Grid& g = f.grid;
    GridFunction out(g);
    double inv2h = 1.0 / (2 * g.h());
    for (std::int64_t flat = 0; flat < g.totalCells(); ++flat) {
        Index3 idx = g.unflatten(flat);
        Index3 up = idx, dn = idx;
        up[axis] += 1;
        dn[axis] -= 1;
        Complex fu(0), fd(0);
        if (periodic) {
            up[axis] = (up[axis] + g.n) % g.n;
            dn[axis] = (dn[axis] + g.n) % g.n;
            fu = f.values[g.flatten(up)];
            fd = f.values[g.flatten(dn)];
        } else {
            if (up[axis] < g.n) fu = f.values[g.flatten(up)];
            if (dn[axis] >= 0) fd = f.values[g.flatten(dn)];
        }
        out.values[flat] = (fu - fd) * inv2h;
        out.support[flat] = 1;
    }
    out.tightenSupport();
    return out;
}

inline void requireInteriorSupport(const GridFunction& f, std::int64_t marginCells) {
    const Grid& g = f.grid;
    for (std::int64_t i : f.supportCells()) {
        Index3 idx = g.unflatten(i);
        for (int k = 0; k < g.dim; ++k)
            if (idx[k] < marginCells || idx[k] >= g.n - marginCells)
                throw SupportTouchesBoundary();
    }
}

inline Complex det2(Complex a, Complex b, Complex c, Complex d) {
    return a * d - b * c;
}

} // namespace detail

/// Determinant of the gradient matrix (d_i u_j), gradients by central
/// differences.
inline GridFunction jacobianDet(const VectorField& u, bool periodic = false) {
    const Grid& g = u.grid();
    int d = u.dim();
    if (!periodic)
        for (const GridFunction& c : u.comp) detail::requireInteriorSupport(c, 2);

    std::vector<std::vector<GridFunction>> grad(d); // grad[j][i] = d_i u_j
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            grad[j].push_back(detail::centralDiff(u.comp[j], i, periodic));

    GridFunction out(g);
    for (std::int64_t c = 0; c < g.totalCells(); ++c) {
        Complex v(0);
        if (d == 1) {
            v = grad[0][0].values[c];
        } else if (d == 2) {
            v = detail::det2(grad[0][0].values[c], grad[0][1].values[c],
                             grad[1][0].values[c], grad[1][1].values[c]);
        } else {
            auto m = [&](int j, int i) { return grad[j][i].values[c]; };
            v = m(0, 0) * detail::det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2)) -
                m(0, 1) * detail::det2(m(1, 0), m(1, 2), m(2, 0), m(2, 2)) +
                m(0, 2) * detail::det2(m(1, 0), m(1, 1), m(2, 0), m(2, 1));
        }
        out.values[c] = v;
        out.support[c] = 1;
    }
    out.tightenSupport();
    return out;
}

inline double gradientLpNorm(const GridFunction& f, double p, bool periodic = false) {
    const Grid& g = f.grid;
    double s = 0;
    std::vector<GridFunction> diffs;
    for (int i = 0; i < g.dim; ++i)
        diffs.push_back(detail::centralDiff(f, i, periodic));
    for (std::int64_t c = 0; c < g.totalCells(); ++c) {
        double m2 = 0;
        for (int i = 0; i < g.dim; ++i) m2 += std::norm(diffs[i].values[c]);
        s += std::pow(std::sqrt(m2), p);
    }
    return std::pow(s * g.cellMeasure(), 1 / p);
}

// ---- bump functions -------------------------------------------------------

namespace detail {

/// C1 smoothstep profile on [0,1].
inline double smoothstep(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * (3 - 2 * t);
}

/// 1 on [-half, half], 0 outside [-2*half - pad, 2*half + pad]; the
/// transition band has width half.
inline double bumpProfile(double x, double half) {
    double a = std::abs(x);
    if (a <= half) return 1;
    return smoothstep(2 - a / half);
}

} // namespace detail

/// Tensor-product bump: 1 on Q, 0 outside 2Q, gradient bounded by 3/side.
inline GridFunction bumpFunction(const Grid& g, const Cube& q) {
    for (int k = 0; k < g.dim; ++k) {
        double c = q.corner[k] + q.side / 2;
        if (c - q.side < g.origin[k] - 1e-9 || c + q.side > g.origin[k] + g.side + 1e-9)
            throw OutOfGrid();
    }
    GridFunction out(g);
    double half = q.side / 2;
    Point center = q.center(g.dim);
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Point m = g.midpoint(i);
        double v = 1;
        for (int k = 0; k < g.dim; ++k)
            v *= detail::bumpProfile(m[k] - center[k], half);
        if (v != 0) {
            out.values[i] = v;
            out.support[i] = 1;
        }
    }
    return out;
}

/// Periodic variant: distances taken on the torus.
inline GridFunction bumpFunctionPeriodic(const Grid& g, const Cube& q) {
    GridFunction out(g);
    double half = q.side / 2;
    Point center = q.center(g.dim);
    double L = g.side;
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        Point m = g.midpoint(i);
        double v = 1;
        for (int k = 0; k < g.dim; ++k) {
            double dx = std::remainder(m[k] - center[k], L);
            v *= detail::bumpProfile(dx, half);
        }
        if (v != 0) {
            out.values[i] = v;
            out.support[i] = 1;
        }
    }
    return out;
}

// ---- lifting a partial derivative to a Jacobian ---------------------------

/// u_k = w and u_i(x) = (x_i - c_i) phi_Q(x) for i != k, so that on Q the
/// Jacobian determinant equals d_k w.
inline VectorField liftDerivativeToJacobian(const GridFunction& w, int axis,
                                            const Cube& q, bool periodic = false) {
    const Grid& g = w.grid;
    if (axis < 0 || axis >= g.dim) throw Error("lift: axis out of range");

    GridFunction phi =
        periodic ? bumpFunctionPeriodic(g, q) : bumpFunction(g, q);
    // supp w must lie in Q, with a 2-cell margin on non-periodic grids
    double margin = periodic ? 0.0 : 2 * g.h();
    Point center = q.center(g.dim);
    for (std::int64_t i : w.supportCells()) {
        Point m = g.midpoint(i);
        for (int k = 0; k < g.dim; ++k) {
            double dx = periodic ? std::remainder(m[k] - center[k], g.side)
                                 : m[k] - center[k];
            if (std::abs(dx) > q.side / 2 - margin + 1e-12) throw SupportExceedsQ();
        }
    }

    VectorField u;
    for (int j = 0; j < g.dim; ++j) {
        if (j == axis) {
            u.comp.push_back(w);
            continue;
        }
        GridFunction c(g);
        for (std::int64_t i : phi.supportCells()) {
            Point m = g.midpoint(i);
            double dx = periodic ? std::remainder(m[j] - center[j], g.side)
                                 : m[j] - center[j];
            c.values[i] = dx * phi.values[i];
            c.support[i] = 1;
        }
        u.comp.push_back(c);
    }
    return u;
}

// ---- periodic spectral divergence solver ----------------------------------

namespace detail {

inline std::mutex& fftwMutex() {
    static std::mutex m;
    return m;
}

/// In-place forward (sign = -1) or backward (sign = +1) DFT of a complex
/// array shaped as the grid. Backward is unnormalized.
inline void dft(const Grid& g, std::vector<Complex>& data, int sign) {
    std::lock_guard<std::mutex> lock(fftwMutex());
    int rank = g.dim;
    std::array<int, 3> dims{};
    for (int k = 0; k < rank; ++k) dims[k] = static_cast<int>(g.n);
    fftw_plan plan = fftw_plan_dft(
        rank, dims.data(), reinterpret_cast<fftw_complex*>(data.data()),
        reinterpret_cast<fftw_complex*>(data.data()),
        sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

/// Signed integer wavenumber for index i on n samples; the Nyquist row
/// (n/2 on even n) is flagged so derivative multipliers can drop it.
inline std::int64_t waveIndex(std::int64_t i, std::int64_t n, bool& nyquist) {
    std::int64_t k = i <= n / 2 ? i : i - n;
    nyquist = (2 * i == n);
    return k;
}

} // namespace detail

/// Solves div v = g on the periodic box by v = grad(laplace^-1) g in
/// Fourier space. The zero mode must vanish (mean-zero g); Nyquist
/// derivative rows are dropped, so the residual is measured against the
/// spectral divergence with the same convention.
inline VectorField divSolve(const GridFunction& gfun) {
    const Grid& g = gfun.grid;
    {
        Complex total(0);
        for (Complex v : gfun.values) total += v;
        double scale = std::max(1.0, gfun.supNorm() *
                                         static_cast<double>(g.totalCells()) *
                                         g.cellMeasure());
        if (std::abs(total) * g.cellMeasure() > 1e-10 * scale) throw NotMeanZero();
    }
    std::vector<Complex> spec = gfun.values;
    detail::dft(g, spec, -1);

    double L = g.side;
    double norm = 1.0 / static_cast<double>(g.totalCells());
    VectorField v;
    for (int j = 0; j < g.dim; ++j) {
        std::vector<Complex> comp(spec.size());
        for (std::int64_t flat = 0; flat < g.totalCells(); ++flat) {
            Index3 idx = g.unflatten(flat);
            double k2 = 0;
            std::array<double, 3> kap{0, 0, 0};
            bool dropped = false;
            for (int a = 0; a < g.dim; ++a) {
                bool ny = false;
                std::int64_t kk = detail::waveIndex(idx[a], g.n, ny);
                kap[a] = 2 * kPi * static_cast<double>(kk) / L;
                if (ny) dropped = true;
                k2 += kap[a] * kap[a];
            }
            if (k2 == 0 || dropped) {
                comp[flat] = Complex(0);
            } else {
                comp[flat] = Complex(0, -kap[j]) / k2 * spec[flat];
            }
        }
        detail::dft(g, comp, +1);
        GridFunction cf(g);
        for (std::int64_t i = 0; i < g.totalCells(); ++i) {
            cf.values[i] = comp[i] * norm;
            cf.support[i] = 1;
        }
        v.comp.push_back(cf);
    }
    return v;
}

/// Spectral divergence with the same Nyquist-dropping convention as
/// divSolve; used for the solver's residual certificate.
inline GridFunction spectralDivergence(const VectorField& v) {
    const Grid& g = v.grid();
    std::vector<Complex> acc(g.totalCells(), Complex(0));
    double L = g.side;
    for (int j = 0; j < g.dim; ++j) {
        std::vector<Complex> spec = v.comp[j].values;
        detail::dft(g, spec, -1);
        for (std::int64_t flat = 0; flat < g.totalCells(); ++flat) {
            Index3 idx = g.unflatten(flat);
            bool ny = false;
            std::int64_t kk = detail::waveIndex(idx[j], g.n, ny);
            double kap = 2 * kPi * static_cast<double>(kk) / L;
            spec[flat] *= ny ? Complex(0) : Complex(0, kap);
        }
        for (std::int64_t i = 0; i < g.totalCells(); ++i) acc[i] += spec[i];
    }
    detail::dft(g, acc, +1);
    GridFunction out(g);
    double norm = 1.0 / static_cast<double>(g.totalCells());
    for (std::int64_t i = 0; i < g.totalCells(); ++i) {
        out.values[i] = acc[i] * norm;
        out.support[i] = 1;
    }
    return out;
}

// ---- roots-of-unity moments -----------------------------------------------

struct Rational {
    long long num = 0;
    long long den = 1;

    void reduce() {
        long long g = std::gcd(std::abs(num), std::abs(den));
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (den < 0) {
            num = -num;
            den = -den;
        }
    }
    bool operator==(const Rational& o) const {
        return num * o.den == o.num * den;
    }
};

/// Expectation of the product zeta_{k_1} ... zeta_{k_d} of independent
/// uniform d-th roots of unity, by exact enumeration. The result is 1 when
/// all indices agree and 0 otherwise; non-rational sums are impossible for
/// tuples of length d.
inline Rational rootsOfUnityMoment(int d, const std::vector<int>& tuple) {
    if (d < 2) throw Error("rootsOfUnityMoment: d must be >= 2");
    if (static_cast<int>(tuple.size()) != d)
        throw Error("rootsOfUnityMoment: tuple length must equal d");
    int N = 0;
    for (int k : tuple) {
        if (k < 1) throw Error("rootsOfUnityMoment: indices start at 1");
        N = std::max(N, k);
    }
    if (N > 6) throw EnumerationTooLarge();
    double total = std::pow(static_cast<double>(d), N);
    if (total > 2e7) throw EnumerationTooLarge();

    // count total-exponent residues over all d^N assignments
    std::vector<long long> counts(d, 0);
    std::vector<int> assign(N, 0);
    while (true) {
        int e = 0;
        for (int j = 0; j < d; ++j) e = (e + assign[tuple[j] - 1]) % d;
        ++counts[e];
        int pos = 0;
        while (pos < N) {
            if (++assign[pos] < d) break;
            assign[pos] = 0;
            ++pos;
        }
        if (pos == N) break;
    }

    // reduce sum_s counts[s] w^s to a rational using cyclotomic relations
    long long value = 0;
    bool rational = false;
    if (d == 2) {
        rational = true;
        value = counts[0] - counts[1];
    } else if (d == 3 || d == 5) {
        rational = true;
        for (int s = 2; s < d; ++s)
            if (counts[s] != counts[1]) rational = false;
        if (rational) value = counts[0] - counts[1];
    } else if (d == 4) {
        rational = counts[1] == counts[3];
        value = counts[0] - counts[2];
    } else if (d == 6) {
        rational = counts[1] + counts[2] == counts[4] + counts[5];
        value = counts[0] - counts[3] - counts[2] + counts[5];
    } else {
        throw EnumerationTooLarge();
    }
    if (!rational) throw Error("rootsOfUnityMoment: non-rational sum encountered");
    long long denom = 1;
    for (int j = 0; j < N; ++j) denom *= d;
    Rational out{value, denom};
    out.reduce();
    return out;
}

/// The factorized closed form: one factor of d per distinct index whose
/// multiplicity is divisible by d, zero otherwise.
inline Rational rootsOfUnityMomentClosedForm(int d, const std::vector<int>& tuple) {
    int N = 0;
    for (int k : tuple) N = std::max(N, k);
    std::vector<int> mult(N, 0);
    for (int k : tuple) ++mult[k - 1];
    Rational out{1, 1};
    for (int m = 0; m < N; ++m) {
        if (mult[m] % d != 0) return Rational{0, 1};
    }
    return out;
}

// ---- Gamma dual-norm estimator --------------------------------------------

struct GammaSample {
    Cube q;
    GridFunction w;
    int axis = 0;
};

struct GammaEstimate {
    double value = 0;
    std::vector<double> perSample;
};

/// Lower bound for sup |int b Ju| over fields with unit gradient budget,
/// using lifted partial derivatives as the search family.
inline GammaEstimate gammaLowerBound(const GridFunction& b,
                                     const std::vector<double>& exponents,
                                     const std::vector<GammaSample>& samples) {
    const Grid& g = b.grid;
    if (static_cast<int>(exponents.size()) != g.dim)
        throw Error("gammaLowerBound: one exponent per component");
    GammaEstimate est;
    for (const GammaSample& s : samples) {
        VectorField u = liftDerivativeToJacobian(s.w, s.axis, s.q);
        GridFunction ju = jacobianDet(u);
        Complex ip(0);
        for (std::int64_t i : ju.supportCells())
            ip += b.values[i] * ju.values[i];
        ip *= g.cellMeasure();
        double denom = 1;
        for (int j = 0; j < g.dim; ++j)
            denom *= gradientLpNorm(u.comp[j], exponents[j]);
        double val = denom > 0 ? std::abs(ip) / denom : 0;
        est.perSample.push_back(val);
        est.value = std::max(est.value, val);
    }
    return est;
}

// ---- s-convex representation ---------------------------------------------

struct SConvexProblem {
    int n = 2;
    std::vector<std::vector<double>> V; // symmetric generating set
    std::function<double(const std::vector<double>&)> norm; // default Euclidean
    double epsilon = 0.5;

    double normOf(const std::vector<double>& x) const {
        if (norm) return norm(x);
        double s = 0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    }
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double supportFunction(const std::vector<std::vector<double>>& V,
                              const std::vector<double>& dir) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : V) best = std::max(best, dot(v, dir));
    return best;
}

inline void normalize(std::vector<double>& x) {
    double n = std::sqrt(dot(x, x));
    if (n > 0)
        for (double& v : x) v /= n;
}

} // namespace detail

/// Radius of the largest Euclidean ball contained in conv(V): the minimum
/// of the support function over unit directions, found by multi-start
/// descent with a compass-search polish.
inline double containedBallRadius(const SConvexProblem& P, int starts = 64) {
    CounterRng rng(0x5c0e, 0);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t ctr = 0;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> dir(P.n);
        for (int i = 0; i < P.n; ++i) dir[i] = rng.normal(ctr++);
        detail::normalize(dir);
        double step = 0.5;
        double cur = detail::supportFunction(P.V, dir);
        while (step > 1e-7) {
            bool improved = false;
            for (int i = 0; i < P.n && !improved; ++i) {
                for (double sg : {1.0, -1.0}) {
                    std::vector<double> cand = dir;
                    cand[i] += sg * step;
                    detail::normalize(cand);
                    double v = detail::supportFunction(P.V, cand);
                    if (v < cur - 1e-15) {
                        cur = v;
                        dir = cand;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step /= 2;
        }
        best = std::min(best, cur);
    }
    return best;
}

struct SConvexTerm {
    std::vector<double> point;   // element of conv(V)
    std::vector<double> weights; // convex weights over V
};

struct SConvexRepresentation {
    std::vector<SConvexTerm> terms;
    std::vector<double> residualNorms; // after 1, 2, ... terms
    double betaHat = 0;
};

namespace detail {

/// Frank-Wolfe projection of y onto conv(V); returns the point and its
/// convex weights.
inline SConvexTerm projectOntoHull(const std::vector<std::vector<double>>& V,
                                   const std::vector<double>& y, int iters,
                                   double tol) {
    int n = static_cast<int>(y.size());
    SConvexTerm t;
    t.weights.assign(V.size(), 0.0);
    t.weights[0] = 1.0;
    t.point = V[0];
    for (int k = 0; k < iters; ++k) {
        double d2 = 0;
        for (int i = 0; i < n; ++i)
            d2 += (y[i] - t.point[i]) * (y[i] - t.point[i]);
        if (d2 <= tol * tol) break;
        std::vector<double> grad(n);
        for (int i = 0; i < n; ++i) grad[i] = y[i] - t.point[i];
        std::size_t bestIdx = 0;
        double bestDot = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < V.size(); ++j) {
            double dp = dot(V[j], grad);
            if (dp > bestDot) {
                bestDot = dp;
                bestIdx = j;
            }
        }
        // exact line search toward the chosen vertex
        std::vector<double> dirv(n);
        for (int i = 0; i < n; ++i) dirv[i] = V[bestIdx][i] - t.point[i];
        double num = dot(dirv, grad), den = dot(dirv, dirv);
        if (den <= 0) break;
        double gamma = std::clamp(num / den, 0.0, 1.0);
        if (gamma <= 0) break;
        for (int i = 0; i < n; ++i) t.point[i] += gamma * dirv[i];
        for (double& w : t.weights) w *= (1 - gamma);
        t.weights[bestIdx] += gamma;
    }
    return t;
}

} // namespace detail

/// Greedy geometric-series representation x = sum eps^k x_k with each
/// x_k an explicit convex combination of V; the residual after n terms is
/// at most eps^n times the contained-ball radius.
inline SConvexRepresentation sconvexRepresent(const SConvexProblem& P,
                                              const std::vector<double>& x,
                                              int maxTerms = 20) {
    SConvexRepresentation rep;
    rep.betaHat = containedBallRadius(P);
    double eps = P.epsilon;
    if (P.normOf(x) > (1 - eps) * rep.betaHat + 1e-12) throw OutsideBall();
    if (P.normOf(x) == 0) return rep;

    std::vector<double> y = x;
    double target = eps * (1 - eps) * rep.betaHat;
    for (int k = 0; k < maxTerms; ++k) {
        SConvexTerm t = detail::projectOntoHull(P.V, y, 20000, target / 2);
        std::vector<double> diff(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) diff[i] = y[i] - t.point[i];
        if (P.normOf(diff) > target)
            throw Error("sconvexRepresent: hull projection failed to converge");
        rep.terms.push_back(t);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = diff[i] / eps;
        // residual of the partial sum: eps^(k+1) * y
        double resid = P.normOf(y) * std::pow(eps, k + 1);
        rep.residualNorms.push_back(resid);
    }
    return rep;
}

// ---- span-of-Jacobians greedy representation ------------------------------

struct SpanRound {
    double residualNorm = 0;   // after this round
    double gradientBudget = 0; // sum over fields of max-grad-norm^d
};

struct SpanRepresentation {
    std::vector<VectorField> fields;
    std::vector<SpanRound> rounds;
    double initialNorm = 0;
};

/// Greedy span demonstration: each round solves div v = residual, splits v
/// by a smooth partition of unity over dyadic cubes, lifts each localized
/// component to a Jacobian, and subtracts the sum of the determinants.
inline SpanRepresentation jacobianSpanRepresent(const GridFunction& f, double p,
                                                int rounds, int generation = 2) {
    const Grid& g = f.grid;
    if (!(p > 1 && std::isfinite(p)))
        throw Error("jacobianSpanRepresent: p must be in (1, inf)");
    if (rounds < 1) throw Error("jacobianSpanRepresent: need at least one round");

    SpanRepresentation rep;
    rep.initialNorm = lpNorm(f, p);
    if (rep.initialNorm == 0) return rep;

    // partition of unity from periodic bumps over one dyadic generation
    std::int64_t per = std::int64_t{1} << generation;
    double side = g.side / static_cast<double>(per);
    std::vector<Cube> cells2Q;
    std::vector<GridFunction> chi;
    {
        std::vector<GridFunction> phis;
        GridFunction total(g);
        Index3 idx{0, 0, 0};
        while (true) {
            Cube pcell;
            pcell.side = side;
            pcell.corner = g.origin;
            for (int k = 0; k < g.dim; ++k) pcell.corner[k] += idx[k] * side;
            Cube q2 = pcell;
            q2.side = 2 * side;
            for (int k = 0; k < g.dim; ++k) q2.corner[k] -= side / 2;
            cells2Q.push_back(q2);
            phis.push_back(bumpFunctionPeriodic(g, pcell));
            for (std::int64_t i = 0; i < g.totalCells(); ++i)
                total.values[i] += phis.back().values[i];
            int k = g.dim - 1;
            while (k >= 0) {
                if (++idx[k] < per) break;
                idx[k] = 0;
                --k;
            }
            if (k < 0) break;
        }
        for (GridFunction& phi : phis) {
            GridFunction c(g);
            for (std::int64_t i = 0; i < g.totalCells(); ++i) {
                if (phi.values[i] != Complex(0)) {
                    c.values[i] = phi.values[i] / total.values[i];
                    c.support[i] = 1;
                }
            }
            chi.push_back(std::move(c));
        }
    }

    GridFunction residual = f;
    double prevNorm = rep.initialNorm;
    for (int round = 0; round < rounds; ++round) {
        VectorField v = divSolve(residual);
        GridFunction correction(g);
        SpanRound info;
        for (std::size_t ci = 0; ci < chi.size(); ++ci) {
            for (int axis = 0; axis < g.dim; ++axis) {
                GridFunction w(g);
                bool any = false;
                for (std::int64_t i : chi[ci].supportCells()) {
                    w.values[i] = chi[ci].values[i] * v.comp[axis].values[i];
                    w.support[i] = 1;
                    any = true;
                }
                if (!any) continue;
                VectorField u =
                    liftDerivativeToJacobian(w, axis, cells2Q[ci], true);
                GridFunction ju = jacobianDet(u, true);
                correction += ju;
                double budget = 1;
                for (int j = 0; j < g.dim; ++j)
                    budget *= gradientLpNorm(u.comp[j], p * g.dim, true);
                info.gradientBudget += budget;
                rep.fields.push_back(std::move(u));
            }
        }
        residual -= correction;
        residual.tightenSupport();
        double rn = lpNorm(residual, p);
        info.residualNorm = rn;
        rep.rounds.push_back(info);
        if (rn > 0.99 * prevNorm) throw StalledResidual();
        prevNorm = rn;
        if (rn <= 1e-12 * rep.initialNorm) break;
    }
    return rep;
}

} // namespace czlab
