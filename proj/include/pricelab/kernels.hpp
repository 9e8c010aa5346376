#pragma once

#include <cmath>

namespace pricelab {

//! Epanechnikov kernel 0.75 (1 - u^2) on [-1, 1], zero outside.
inline double epanechnikov(double u)
{
    double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    return 0.75 * (1.0 - u * u);
}

//! Derivative of the Epanechnikov kernel, -1.5 u on (-1, 1).
inline double epanechnikov_deriv(double u)
{
    if (std::abs(u) >= 1.0) return 0.0;
    return -1.5 * u;
}

enum class KernelFamily { epanechnikov };

//! Kernel family plus bandwidth; the only family used is Epanechnikov.
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;
    double bandwidth = 1.0;

    double eval(double u) const { return epanechnikov(u); }
    double deriv(double u) const { return epanechnikov_deriv(u); }
};

} // namespace pricelab
