#include "cgp/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include "cgp/error.hpp"

namespace cgp {

namespace {

constexpr int kSmoothSentinel = 1 << 20;

// Probabilists' Hermite polynomial He_n(u).
double hermite(int n, double u) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = u;
  for (int k = 1; k < n; ++k) {
    const double next = u * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Closed-form derivatives of the Matern profiles as functions of the signed
// lag h. Every expression is continuous at h = 0.
double matern32_profile(double theta, double h, int order) {
  const double a = std::sqrt(3.0) / theta;
  const double r = std::abs(h);
  const double e = std::exp(-a * r);
  switch (order) {
    case 0: return (1.0 + a * r) * e;
    case 1: return -a * a * h * e;
    case 2: return -a * a * (1.0 - a * r) * e;
    default: break;
  }
  throw UnsupportedDerivativeError("matern32: derivative order exceeds smoothness class");
}

double matern52_profile(double theta, double h, int order) {
  const double a = std::sqrt(5.0) / theta;
  const double r = std::abs(h);
  const double e = std::exp(-a * r);
  const double a2 = a * a;
  switch (order) {
    case 0: return (1.0 + a * r + a2 * r * r / 3.0) * e;
    case 1: return -(a2 / 3.0) * h * (1.0 + a * r) * e;
    case 2: return -(a2 / 3.0) * (1.0 + a * r - a2 * r * r) * e;
    case 3: return (a2 * a2 / 3.0) * h * (3.0 - a * r) * e;
    case 4: return (a2 * a2 / 3.0) * (3.0 - 5.0 * a * r + a2 * r * r) * e;
    default: break;
  }
  throw UnsupportedDerivativeError("matern52: derivative order exceeds smoothness class");
}

std::string lower_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_orders(KernelFamily family, std::span<const int> p, std::span<const int> q) {
  const int limit = smoothness_order(family);
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] < 0 || q[m] < 0) throw ArgumentError("eval_deriv: negative derivative order");
    if (p[m] > limit || q[m] > limit) {
      std::ostringstream msg;
      msg << "eval_deriv: order (" << p[m] << "," << q[m] << ") not admissible for "
          << to_string(family) << " (smoothness class " << limit << ")";
      throw UnsupportedDerivativeError(msg.str());
    }
  }
}

}  // namespace

int smoothness_order(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return kSmoothSentinel;
    case KernelFamily::Matern52: return 2;
    case KernelFamily::Matern32: return 1;
    case KernelFamily::Exponential: return 0;
  }
  return 0;
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Exponential: return "exponential";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  const std::string s = lower_case(name);
  if (s == "se" || s == "squared-exponential" || s == "squared_exponential" || s == "gaussian")
    return KernelFamily::SquaredExponential;
  if (s == "matern52" || s == "matern5/2") return KernelFamily::Matern52;
  if (s == "matern32" || s == "matern3/2") return KernelFamily::Matern32;
  if (s == "exponential" || s == "exp") return KernelFamily::Exponential;
  throw ConfigurationError("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, double variance, std::vector<double> lengthscales)
    : family_(family), variance_(variance), lengthscales_(std::move(lengthscales)) {
  if (!(variance_ > 0.0) || !std::isfinite(variance_))
    throw ArgumentError("KernelSpec: variance must be positive");
  if (lengthscales_.empty()) throw ArgumentError("KernelSpec: at least one lengthscale required");
  for (double t : lengthscales_) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("KernelSpec: lengthscales must be positive");
  }
}

KernelSpec KernelSpec::with_variance(double variance) const {
  return KernelSpec(family_, variance, lengthscales_);
}

KernelSpec KernelSpec::with_lengthscales(std::vector<double> lengthscales) const {
  return KernelSpec(family_, variance_, std::move(lengthscales));
}

double profile_derivative(KernelFamily family, double theta, double h, int order) {
  if (order < 0) throw ArgumentError("profile_derivative: negative order");
  switch (family) {
    case KernelFamily::SquaredExponential: {
      // d^n/dh^n exp(-h^2 / 2 theta^2) = (-1)^n theta^-n He_n(h/theta) exp(...)
      const double u = h / theta;
      const double sign = (order % 2 == 0) ? 1.0 : -1.0;
      return sign * std::pow(theta, -order) * hermite(order, u) * std::exp(-0.5 * u * u);
    }
    case KernelFamily::Matern52: return matern52_profile(theta, h, order);
    case KernelFamily::Matern32: return matern32_profile(theta, h, order);
    case KernelFamily::Exponential:
      if (order != 0) throw UnsupportedDerivativeError("exponential kernel is not differentiable");
      return std::exp(-std::abs(h) / theta);
  }
  return 0.0;
}

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp) {
  if (x.size() != spec.dim() || xp.size() != spec.dim())
    throw ArgumentError("kernel eval: dimension mismatch");
  double value = spec.variance();
  for (std::size_t m = 0; m < x.size(); ++m)
    value *= profile_derivative(spec.family(), spec.lengthscales()[m], x[m] - xp[m], 0);
  return value;
}

double eval(const KernelSpec& spec, double x, double xp) {
  return eval(spec, std::span<const double>(&x, 1), std::span<const double>(&xp, 1));
}

double eval_deriv(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp,
                  std::span<const int> p, std::span<const int> q) {
  if (x.size() != spec.dim() || xp.size() != spec.dim() || p.size() != spec.dim() ||
      q.size() != spec.dim())
    throw ArgumentError("kernel eval_deriv: dimension mismatch");
  check_orders(spec.family(), p, q);
  // K depends on h = x - x', so d/dx' = -d/dh.
  double value = spec.variance();
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double sign = (q[m] % 2 == 0) ? 1.0 : -1.0;
    value *= sign * profile_derivative(spec.family(), spec.lengthscales()[m], x[m] - xp[m], p[m] + q[m]);
  }
  return value;
}

double eval_deriv(const KernelSpec& spec, double x, double xp, int p, int q) {
  return eval_deriv(spec, std::span<const double>(&x, 1), std::span<const double>(&xp, 1),
                    std::span<const int>(&p, 1), std::span<const int>(&q, 1));
}

}  // namespace cgp
