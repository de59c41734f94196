#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cgp {

enum class KernelFamily { SquaredExponential, Matern52, Matern32, Exponential };

/// Highest derivative order admissible per argument (the sample-path
/// smoothness class). Squared exponential reports a large sentinel.
int smoothness_order(KernelFamily family);

std::string_view to_string(KernelFamily family);
/// Accepts "se", "squared-exponential", "matern52", "matern32", "exponential"
/// (case-insensitive). Throws ConfigurationError otherwise.
KernelFamily parse_kernel_family(std::string_view name);

/// Stationary tensor-product covariance
///   K(x, x') = variance * prod_m k_m(x_m - x'_m)
/// with one lengthscale per input dimension.
class KernelSpec {
 public:
  KernelSpec(KernelFamily family, double variance, std::vector<double> lengthscales);

  KernelFamily family() const { return family_; }
  double variance() const { return variance_; }
  const std::vector<double>& lengthscales() const { return lengthscales_; }
  std::size_t dim() const { return lengthscales_.size(); }

  KernelSpec with_variance(double variance) const;
  KernelSpec with_lengthscales(std::vector<double> lengthscales) const;

 private:
  KernelFamily family_;
  double variance_;
  std::vector<double> lengthscales_;
};

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp);
double eval(const KernelSpec& spec, double x, double xp);

/// d^{|p|+|q|} K / dx^p dx'^q, orders given per dimension.
double eval_deriv(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp,
                  std::span<const int> p, std::span<const int> q);
double eval_deriv(const KernelSpec& spec, double x, double xp, int p, int q);

/// n-th derivative of the unit-variance 1-D profile k(h) of `family` with
/// lengthscale `theta`. Exposed for tests.
double profile_derivative(KernelFamily family, double theta, double h, int order);

}  // namespace cgp
