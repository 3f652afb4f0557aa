#pragma once

// Independent numerical oracles used by the test suites. Nothing here calls
// into the library's implementation paths being checked.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ppipw/dataset.hpp"
#include "ppipw/rng.hpp"

namespace oracles {

// erf via the all-positive-terms confluent series
//   erf(x) = 2 x e^{-x^2} / sqrt(pi) * sum_k (2x^2)^k / (1*3*...*(2k+1)),
// evaluated in long double; no cancellation, accurate well below 1e-15
// relative on [0, 6].
inline long double erf_series(long double x) {
  if (x < 0) return -erf_series(-x);
  const long double x2 = x * x;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 500; ++k) {
    term *= 2.0L * x2 / (2.0L * k + 1.0L);
    sum += term;
    if (term < 1e-25L * sum) break;
  }
  const long double sqrt_pi = 1.772453850905516027298167L;
  return 2.0L * x * std::exp(-x2) / sqrt_pi * sum;
}

inline long double normal_cdf(long double x) {
  return 0.5L * (1.0L + erf_series(x / 1.414213562373095048801689L));
}

// Central finite differences of a scalar function of a vector.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& w,
    double step = 1e-5) {
  Eigen::VectorXd grad(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Eigen::VectorXd lo = w, hi = w;
    lo[i] -= step;
    hi[i] += step;
    grad[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return grad;
}

// Stable log-domain sigmoid used as an independent check of score values:
// log(pi(t)) = -log1p(exp(-t)).
inline double log_sigmoid(double t) {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

// Random dataset with rows inside the unit ball, mixed treatments and
// outcomes in [-2, 2].
inline ppipw::Dataset random_dataset(ppipw::RngStream& stream, Eigen::Index n,
                                     Eigen::Index d) {
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXi t(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd row = stream.standard_normal_vector(d);
    double norm = row.norm();
    double radius = stream.uniform();
    if (norm > 0) row *= radius / norm;
    x.row(i) = row.transpose();
    t[i] = stream.bernoulli(0.5);
    y[i] = 4.0 * stream.uniform() - 2.0;
  }
  return ppipw::Dataset(std::move(x), std::move(t), std::move(y));
}

}  // namespace oracles
