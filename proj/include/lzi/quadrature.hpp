#pragma once

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace lzi::quad {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(std::complex<double> z) { return std::abs(z); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().maxCoeff();
}

template <class V>
struct Estimate {
  V value;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [0, 1]; odd entries are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

/// One G7-K15 panel; the error is |K15 - G7|.
template <class F>
auto gauss_kronrod15(F&& f, double lo, double hi) {
  using V = decltype(f(lo));
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const V fc = f(centre);
  V kronrod = detail::kWgk[7] * fc;
  V gauss = detail::kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * detail::kXgk[j];
    const V f1 = f(centre - dx);
    const V f2 = f(centre + dx);
    const V sum = f1 + f2;
    kronrod = kronrod + detail::kWgk[j] * sum;
    if (j % 2 == 1) gauss = gauss + detail::kWg[j / 2] * sum;
  }
  const V k = half * kronrod;
  const V g = half * gauss;
  const V diff = k - g;
  return Estimate<V>{k, magnitude(diff), 15};
}

/// Recursive bisection until each panel meets its share of abs_tol or the
/// depth limit is reached; the remaining error is reported, not hidden.
template <class F>
auto adaptive_gauss_kronrod(F&& f, double lo, double hi, double abs_tol, int max_depth = 40)
    -> Estimate<decltype(f(lo))> {
  auto panel = gauss_kronrod15(f, lo, hi);
  if (panel.error <= abs_tol || max_depth == 0) return panel;
  const double mid = 0.5 * (lo + hi);
  auto left = adaptive_gauss_kronrod(f, lo, mid, 0.5 * abs_tol, max_depth - 1);
  auto right = adaptive_gauss_kronrod(f, mid, hi, 0.5 * abs_tol, max_depth - 1);
  return {left.value + right.value, left.error + right.error,
          panel.evaluations + left.evaluations + right.evaluations};
}

}  // namespace lzi::quad
