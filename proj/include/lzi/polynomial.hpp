#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lzi::poly {

/// Coefficients in ascending powers: c[0] + c[1] x + ... + c[d] x^d.
using Coeffs = std::vector<double>;

Coeffs multiply(std::span<const double> a, std::span<const double> b);

/// prod_i (x - r_i).
Coeffs from_roots(std::span<const double> roots);

/// a + b, padding the shorter operand with zeros.
Coeffs add(std::span<const double> a, std::span<const double> b);

Coeffs scale(std::span<const double> a, double s);

double evaluate(std::span<const double> c, double x);
double evaluate_derivative(std::span<const double> c, double x);

/// Drops trailing coefficients that are exactly zero.
Coeffs trim(Coeffs c);

/// All complex roots via eigenvalues of the companion matrix.
std::vector<std::complex<double>> companion_roots(std::span<const double> c);

}  // namespace lzi::poly
