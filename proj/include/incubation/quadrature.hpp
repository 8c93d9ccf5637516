#pragma once

#include <cmath>

namespace incubation {

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_step(F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole, Scalar tol, int depth)
{
    const Scalar m = (a + b) / 2;
    const Scalar lm = (a + m) / 2;
    const Scalar rm = (m + b) / 2;
    const Scalar flm = f(lm);
    const Scalar frm = f(rm);
    const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
    const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
    const Scalar delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, Scalar tol, int max_depth = 48)
{
    const Scalar fa = f(a);
    const Scalar fb = f(b);
    const Scalar fm = f((a + b) / 2);
    const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace incubation
