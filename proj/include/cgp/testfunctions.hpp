#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgp/constraint.hpp"

namespace cgp {

/// Synthetic regression target with its domain and the shape it satisfies.
struct TestFunction {
  std::string id;
  int dim = 1;
  std::vector<double> lower;
  std::vector<double> upper;
  ShapeConstraint shape;
  /// Lengthscales (original units) used by the benchmarks by default.
  std::vector<double> default_theta;
  std::function<double(std::span<const double>)> f;

  double operator()(std::span<const double> x) const { return f(x); }
  double operator()(double x) const { return f(std::span<const double>(&x, 1)); }
};

/// 1-D on (0, 10]: flat, step, linear, exponential, logistic, sinusoidal.
/// logistic2 on [0, 1]. 2-D on [0, 1]^2: f1 .. f6.
const TestFunction& find_test_function(std::string_view id);
std::vector<std::string> test_function_ids_1d();
std::vector<std::string> test_function_ids_2d();

}  // namespace cgp
