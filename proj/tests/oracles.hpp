// Test-only independent oracles: these deliberately avoid the implementation
// paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bflsim/vec.hpp"

namespace oracles {

using bflsim::Mat;
using bflsim::Vec;

// Cyclic Jacobi eigenvalue iteration for symmetric matrices; returns all
// eigenvalues.  Independent of the library's power-iteration path.
inline Vec jacobi_eigenvalues(Mat a, std::size_t sweeps = 100, double tol = 1e-14) {
    const std::size_t n = a.rows;
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < tol) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a.at(p, q)) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * a.at(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a.at(i, i);
    return ev;
}

// Spectral radius of (Lambda - 11^T/M) straight from the Jacobi eigenvalues.
inline double deflated_spectral_radius(const Mat& lambda) {
    const std::size_t m = lambda.rows;
    Mat b = lambda;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) b.at(i, j) -= 1.0 / static_cast<double>(m);
    double rho = 0.0;
    for (double ev : jacobi_eigenvalues(b)) rho = std::max(rho, std::fabs(ev));
    return rho;
}

// Central finite difference of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double eps = 1e-5) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += eps;
        xm[i] -= eps;
        g[i] = (f(xp) - f(xm)) / (2.0 * eps);
    }
    return g;
}

// Per-component relative error with a vector-scaled floor: components far
// below the vector's dominant magnitude sit under the finite-difference
// cancellation noise and are compared against that floor instead.
inline double max_rel_error(const Vec& a, const Vec& b) {
    double amax = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        amax = std::max({amax, std::fabs(a[i]), std::fabs(b[i])});
    const double floor = std::max(1e-4 * amax, 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
    }
    return worst;
}

}  // namespace oracles
