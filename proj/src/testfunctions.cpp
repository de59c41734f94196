#include "cgp/testfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cgp/error.hpp"

namespace cgp {

namespace {

TestFunction one_d(std::string id, double theta, std::function<double(double)> g) {
  TestFunction t;
  t.id = std::move(id);
  t.dim = 1;
  t.lower = {0.0};
  t.upper = {10.0};
  t.shape = ShapeConstraint::monotone();
  t.default_theta = {theta};
  t.f = [g = std::move(g)](std::span<const double> x) { return g(x[0]); };
  return t;
}

TestFunction two_d(std::string id, double t1, double t2, std::function<double(double, double)> g) {
  TestFunction t;
  t.id = std::move(id);
  t.dim = 2;
  t.lower = {0.0, 0.0};
  t.upper = {1.0, 1.0};
  t.shape = ShapeConstraint::isotonic2d(AxisOrder::Increasing, AxisOrder::Increasing);
  t.default_theta = {t1, t2};
  t.f = [g = std::move(g)](std::span<const double> x) { return g(x[0], x[1]); };
  return t;
}

std::map<std::string, TestFunction, std::less<>> build_library() {
  std::map<std::string, TestFunction, std::less<>> lib;
  auto add = [&](TestFunction t) { lib.emplace(t.id, std::move(t)); };
  add(one_d("flat", 100.0, [](double) { return 3.0; }));
  add(one_d("step", 0.8, [](double x) { return x <= 8.0 ? 3.0 : 8.0; }));
  add(one_d("linear", 8.6, [](double x) { return 0.3 * x; }));
  add(one_d("exponential", 1.0, [](double x) { return 0.15 * std::exp(0.6 * x - 3.0); }));
  add(one_d("logistic", 2.0, [](double x) { return 3.0 / (1.0 + std::exp(-2.0 * x + 10.0)); }));
  add(one_d("sinusoidal", 2.5, [](double x) { return 0.32 * (x + std::sin(x)); }));

  TestFunction l2 = one_d("logistic2", 0.4, [](double x) { return 2.0 / (1.0 + std::exp(-8.0 * x + 4.0)); });
  l2.upper = {1.0};
  add(std::move(l2));

  add(two_d("f1", 0.17, 0.38, [](double x1, double) { return std::sqrt(x1); }));
  add(two_d("f2", 0.46, 1.32, [](double x1, double x2) { return 0.5 * x1 + 0.5 * x2; }));
  add(two_d("f3", 0.18, 0.22, [](double x1, double x2) { return std::min(x1, x2); }));
  add(two_d("f4", 0.38, 0.01,
            [](double x1, double x2) { return 0.25 * x1 + 0.25 * x2 + (x1 + x2 > 1.0 ? 0.5 : 0.0); }));
  add(two_d("f5", 0.08, 0.09,
            [](double x1, double x2) { return 0.25 * x1 + 0.25 * x2 + (std::min(x1, x2) > 0.5 ? 0.5 : 0.0); }));
  add(two_d("f6", 0.02, 0.17, [](double x1, double x2) {
    const double r2 = (x1 - 1.0) * (x1 - 1.0) + (x2 - 1.0) * (x2 - 1.0);
    return r2 < 1.0 ? std::sqrt(1.0 - r2) : 0.0;
  }));
  return lib;
}

const std::map<std::string, TestFunction, std::less<>>& library() {
  static const auto lib = build_library();
  return lib;
}

}  // namespace

const TestFunction& find_test_function(std::string_view id) {
  const auto& lib = library();
  const auto it = lib.find(id);
  if (it == lib.end()) throw ConfigurationError("unknown test function '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> test_function_ids_1d() {
  return {"flat", "step", "linear", "exponential", "logistic", "sinusoidal"};
}

std::vector<std::string> test_function_ids_2d() { return {"f1", "f2", "f3", "f4", "f5", "f6"}; }

}  // namespace cgp
