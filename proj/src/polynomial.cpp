#include "lzi/polynomial.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "lzi/errors.hpp"

namespace lzi::poly {

Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Coeffs from_roots(std::span<const double> roots) {
  Coeffs out{1.0};
  for (double r : roots) {
    const double factor[2] = {-r, 1.0};
    out = multiply(out, factor);
  }
  return out;
}

Coeffs add(std::span<const double> a, std::span<const double> b) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Coeffs scale(std::span<const double> a, double s) {
  Coeffs out(a.begin(), a.end());
  for (auto& c : out) c *= s;
  return out;
}

double evaluate(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double evaluate_derivative(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * c[k];
  return acc;
}

Coeffs trim(Coeffs c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  return c;
}

std::vector<std::complex<double>> companion_roots(std::span<const double> c) {
  const Coeffs p = trim(Coeffs(c.begin(), c.end()));
  if (p.empty()) throw InvalidArgument("companion_roots: zero polynomial");
  const auto degree = static_cast<Eigen::Index>(p.size() - 1);
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -p[i] / p[degree];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion_roots: eigenvalue solver failed");
  std::vector<std::complex<double>> roots(solver.eigenvalues().begin(), solver.eigenvalues().end());
  return roots;
}

}  // namespace lzi::poly
