#include "dro/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace dro {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (symmetric; nodes are the
// positive half, node[7]=0).
const double gk_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
const double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
const double gk_wg[4] = {  // Gauss-7 weights for nodes 1,3,5,7
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Interval {
    double a, b, value, error;
};

Interval gk15(const ScalarFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * gk_nodes[i]);
        fv[14 - i] = f(c + h * gk_nodes[i]);
    }
    fv[7] = f(c);
    double kronrod = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i)
        kronrod += gk_wk[i] * (i == 7 ? fv[7] : fv[i] + fv[14 - i]);
    for (int i = 0; i < 4; ++i) {
        int j = 2 * i + 1;
        gauss += gk_wg[i] * (j == 7 ? fv[7] : fv[j] + fv[14 - j]);
    }
    kronrod *= h;
    gauss *= h;
    double err = std::abs(kronrod - gauss);
    // Sharpen the estimate the usual way: error decays ~ (200|K-G|)^1.5.
    if (err > 0.0) err = std::min(err, std::pow(200.0 * err, 1.5));
    if (!std::isfinite(kronrod))
        throw NumericsError("integrate: non-finite integrand value");
    return {a, b, kronrod, err};
}

} // namespace

double integrate(const ScalarFn& f, double a, double b,
                 const std::vector<double>& breakpoints, const Tolerances& tol) {
    if (a > b) throw NumericsError("integrate: a > b");
    if (a == b) return 0.0;

    std::vector<Interval> work;
    double prev = a;
    std::vector<double> pts = breakpoints;
    std::sort(pts.begin(), pts.end());
    for (double p : pts)
        if (p > prev && p < b) {
            work.push_back(gk15(f, prev, p));
            prev = p;
        }
    work.push_back(gk15(f, prev, b));

    auto totals = [&work]() {
        double v = 0.0, e = 0.0;
        for (const auto& iv : work) { v += iv.value; e += iv.error; }
        return std::pair<double, double>(v, e);
    };

    int splits = 0;
    for (;;) {
        auto [value, error] = totals();
        const double target = std::max(tol.quad_rel * std::abs(value), 1e-13);
        if (error <= target) return value;
        if (splits >= tol.max_iter)
            throw QuadratureError("integrate: no convergence after max_iter subdivisions", value);
        // split the interval with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t i = 1; i < work.size(); ++i)
            if (work[i].error > work[worst].error) worst = i;
        Interval iv = work[worst];
        const double mid = 0.5 * (iv.a + iv.b);
        if (mid <= iv.a || mid >= iv.b)
            throw QuadratureError("integrate: interval collapsed before convergence", value);
        work[worst] = gk15(f, iv.a, mid);
        work.push_back(gk15(f, mid, iv.b));
        ++splits;
    }
}

double integrate(const ScalarFn& f, double a, double b, const Tolerances& tol) {
    return integrate(f, a, b, {}, tol);
}

double find_root(const ScalarFn& f, double a, double b, const Tolerances& tol) {
    double fa = f(a), fb = f(b);
    if (std::isnan(fa) || std::isnan(fb))
        throw NumericsError("find_root: NaN at bracket endpoint");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw BracketError("find_root: no sign change on bracket");

    if (std::abs(fa) < std::abs(fb)) { std::swap(a, b); std::swap(fa, fb); }
    double c = a, fc = fa, d = b - a, s = b, fs = fb;
    bool mflag = true;

    int iters = 0;
    while (fb != 0.0 && fs != 0.0 && std::abs(b - a) > tol.root_abs) {
        if (++iters > tol.max_iter + 100)
            break;  // bracket is still valid; return best point below
        if (fa != fc && fb != fc) {
            // inverse quadratic interpolation
            s = a * fb * fc / ((fa - fb) * (fa - fc))
              + b * fa * fc / ((fb - fa) * (fb - fc))
              + c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        const double t = 0.25 * (3.0 * a + b);
        if ((!((s > t && s < b) || (s < t && s > b))) ||
            (mflag && std::abs(s - b) >= 0.5 * std::abs(b - c)) ||
            (!mflag && std::abs(s - b) >= 0.5 * std::abs(c - d)) ||
            (mflag && std::abs(b - c) < tol.root_abs) ||
            (!mflag && std::abs(c - d) < tol.root_abs)) {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        fs = f(s);
        if (std::isnan(fs)) throw NumericsError("find_root: NaN from f");
        d = c;
        c = b; fc = fb;
        if (fa * fs < 0.0) { b = s; fb = fs; }
        else               { a = s; fa = fs; }
        if (std::abs(fa) < std::abs(fb)) { std::swap(a, b); std::swap(fa, fb); }
    }
    return std::abs(fb) <= std::abs(fs) ? b : s;
}

MinimizeResult minimize_scalar(const ScalarFn& f, double a, double b, const Tolerances& tol) {
    if (a > b) throw NumericsError("minimize_scalar: a > b");
    static const double invphi  = (std::sqrt(5.0) - 1.0) / 2.0;
    static const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;
    double x1 = a + invphi2 * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int iters = 0;
    while (b - a > tol.min_abs && ++iters < 400) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = a + invphi2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    double xm = 0.5 * (a + b);
    double fm = f(xm);
    MinimizeResult best{xm, fm};
    if (f1 < best.fx) best = {x1, f1};
    if (f2 < best.fx) best = {x2, f2};
    return best;
}

double monotone_threshold(const ScalarFn& g, double a, double b, const Tolerances& tol) {
    double ga = g(a);
    if (std::isnan(ga)) throw NumericsError("monotone_threshold: NaN from g");
    if (ga <= 0.0) return a;
    double gb = g(b);
    if (gb >= 0.0) return b;
    // bisection keeps [lo: g>0, hi: g<0]
    double lo = a, hi = b;
    while (hi - lo > tol.root_abs) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::isnan(gm)) throw NumericsError("monotone_threshold: NaN from g");
        if (gm > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Chebyshev initial guess
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        nodes[i] = xm - xl * z;
        nodes[n - 1 - i] = xm + xl * z;
        weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

std::size_t grid_argmin_unimodal(const std::function<double(std::size_t)>& f, std::size_t n) {
    if (n == 0) throw NumericsError("grid_argmin_unimodal: empty grid");
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 2) {
        const std::size_t m1 = lo + (hi - lo) / 3;
        const std::size_t m2 = hi - (hi - lo) / 3;
        if (f(m1) <= f(m2)) hi = m2; else lo = m1;
    }
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i <= hi; ++i)
        if (f(i) < f(best)) best = i;
    return best;
}

} // namespace dro
