#ifndef DRO_NUMERICS_HPP
#define DRO_NUMERICS_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dro {

// Shared tolerances for quadrature, root finding, and scalar minimization.
struct Tolerances {
    double quad_rel = 1e-8;   // relative error target for integrate()
    double root_abs = 1e-10;  // bracket width target for find_root()
    double min_abs  = 1e-9;   // interval width target for minimize_scalar()
    int    max_iter = 200;    // max subdivisions / iterations

    Tolerances with_quad_rel(double r) const { Tolerances t = *this; t.quad_rel = r; return t; }
};

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature failed to converge; carries the best available estimate.
struct QuadratureError : NumericsError {
    double best_estimate;
    QuadratureError(const std::string& msg, double best)
        : NumericsError(msg), best_estimate(best) {}
};

struct BracketError : NumericsError {
    using NumericsError::NumericsError;
};

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (7,15) quadrature of f over [a,b].
double integrate(const ScalarFn& f, double a, double b, const Tolerances& tol = {});

// Same, but splits at known interior breakpoints (kink locations) first.
double integrate(const ScalarFn& f, double a, double b,
                 const std::vector<double>& breakpoints, const Tolerances& tol = {});

// Brent-style bracketed root finding; requires f(a)*f(b) <= 0.
double find_root(const ScalarFn& f, double a, double b, const Tolerances& tol = {});

struct MinimizeResult {
    double x;
    double fx;
};

// Golden-section minimization of a unimodal f on [a,b].
MinimizeResult minimize_scalar(const ScalarFn& f, double a, double b, const Tolerances& tol = {});

// For g with at most one sign change from positive to negative on [a,b]:
// returns the crossing point, a if g(a) <= 0 already, b if g stays positive.
double monotone_threshold(const ScalarFn& g, double a, double b, const Tolerances& tol = {});

// Gauss-Legendre nodes/weights on [a,b] (used by the brute-force test oracles).
void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights);

// Exact argmin over indices [0,n) of a unimodal discrete function.
std::size_t grid_argmin_unimodal(const std::function<double(std::size_t)>& f, std::size_t n);

} // namespace dro

#endif
