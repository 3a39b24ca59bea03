#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shiftshare::stats {

// Linear interpolation between order statistics (R type 7).
double quantile_sorted(std::span<const double> sorted, double prob);
double quantile(std::vector<double> values, double prob);

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

// Kolmogorov-Smirnov distance between the sample and Uniform(0,1).
double ks_uniform(std::vector<double> sample);

double pearson(std::span<const double> a, std::span<const double> b);

// Counter-based generator: the stream for (seed, stream) does not depend on
// what other streams have been consumed.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();              // (0, 1), never 0 or 1
  double uniform(double a, double b);
  double exponential();          // rate 1
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

}  // namespace shiftshare::stats
