#pragma once

// l1-stable sketching: C v has i.i.d. Cauchy(0, ||v||_1) coordinates, so the
// median of their absolute values estimates ||v||_1.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/random.hpp"

namespace treecount {

inline constexpr double kDefaultSketchConstant = 8.0;
inline constexpr double kCauchyClamp = 1e12;

struct CauchySketch {
  std::size_t rows = 0;
  std::size_t dim = 0;
  double delta = 0.0;
  double eps = 0.0;
  double constant = kDefaultSketchConstant;
  Eigen::MatrixXd entries;  ///< rows x dim

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(v.size()) != dim) throw PreconditionError("CauchySketch::apply: dimension mismatch");
    return entries * v;
  }
};

/// t = ceil(c * eps^-2 * ln(1/delta)), bumped to the next odd number.
inline std::size_t cauchy_rows(double delta, double eps, double constant = kDefaultSketchConstant) {
  auto t = static_cast<std::size_t>(std::ceil(constant * std::log(1.0 / delta) / (eps * eps)));
  t = std::max<std::size_t>(t, 1);
  return t % 2 == 0 ? t + 1 : t;
}

inline double standard_cauchy(Rng& rng) {
  const double x = std::tan(std::numbers::pi * (uniform01(rng) - 0.5));
  return std::clamp(x, -kCauchyClamp, kCauchyClamp);
}

/// Entries are drawn row by row from `rng`.
inline CauchySketch build_sketch(std::size_t d, double delta, double eps, Rng& rng,
                                 double constant = kDefaultSketchConstant) {
  if (d == 0) throw PreconditionError("build_sketch: dimension must be positive");
  if (!(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0)) {
    throw PreconditionError("build_sketch: delta and eps must lie in (0, 1)");
  }
  CauchySketch sk;
  sk.rows = cauchy_rows(delta, eps, constant);
  sk.dim = d;
  sk.delta = delta;
  sk.eps = eps;
  sk.constant = constant;
  sk.entries.resize(static_cast<Eigen::Index>(sk.rows), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < sk.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < sk.entries.cols(); ++j) sk.entries(i, j) = standard_cauchy(rng);
  }
  return sk;
}

/// Median of |sketched_i|; for even lengths the upper middle element.
inline double recover(const Eigen::VectorXd& sketched) {
  if (sketched.size() == 0) return 0.0;
  std::vector<double> a(static_cast<std::size_t>(sketched.size()));
  for (Eigen::Index i = 0; i < sketched.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(sketched(i));
  const auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
  std::nth_element(a.begin(), mid, a.end());
  return *mid;
}

inline double recover(const Eigen::VectorXd& sketched, const CauchySketch& sk) {
  if (static_cast<std::size_t>(sketched.size()) != sk.rows) {
    throw PreconditionError("recover: sketched vector length does not match sketch rows");
  }
  return recover(sketched);
}

}  // namespace treecount
