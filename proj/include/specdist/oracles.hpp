#pragma once

// Closed-form reference values, independent of the distance engine:
// 1-D transport, Fejer kernel and the circle bounds rho_N / rho'_N,
// geodesic distances, Berezin kernels and coherent-state tails.

#include "specdist/states.hpp"

#include <cmath>
#include <complex>
#include <functional>

namespace specdist::oracle {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

/// Plain summation for short sums, compensated for N > 64.
class SeriesSum {
 public:
  explicit SeriesSum(int n) : compensated_(n > 64) {}
  void add(double x) {
    if (compensated_) kahan_.add(x);
    else plain_ += x;
  }
  double value() const { return compensated_ ? kahan_.value() : plain_; }

 private:
  bool compensated_;
  CompensatedSum kahan_;
  double plain_ = 0.0;
};

/// W_1 between distributions on a common window: sum_j |CDF_p(j) - CDF_q(j)|.
inline double lattice_wasserstein(const LatticeDistribution& p, const LatticeDistribution& q) {
  if (p.window_min != q.window_min || p.p.size() != q.p.size())
    throw InvalidInput("lattice_wasserstein: distributions live on different windows");
  double cp = 0.0, cq = 0.0;
  CompensatedSum total;
  for (Index j = 0; j + 1 < p.p.size(); ++j) {
    cp += p.p(j);
    cq += q.p(j);
    total.add(std::abs(cp - cq));
  }
  return total.value();
}

/// sum_k |k - n| p_k
inline double lattice_point_distance(const LatticeDistribution& p, std::int64_t site) {
  CompensatedSum total;
  for (Index i = 0; i < p.p.size(); ++i)
    total.add(static_cast<double>(std::abs(p.window_min + i - site)) * p.p(i));
  return total.value();
}

/// rho_N(x) = (8/pi) sum_{n odd <= N} (-1)^((n-1)/2) / n^2 (1 - n/(N+1)) sin(n x / 2)
inline double rho_lower(int n_cut, double x) {
  if (n_cut < 1) throw InvalidInput("rho_lower: N must be >= 1");
  SeriesSum s(n_cut);
  for (int n = 1; n <= n_cut; n += 2) {
    const double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    s.add(sign / (double(n) * n) * (1.0 - double(n) / (n_cut + 1)) * std::sin(0.5 * n * x));
  }
  return 8.0 / kPi * s.value();
}

/// rho'_N(x) = 2 sqrt(2) sqrt( sum_{n <= N} (1 - n/(N+1))^2 sin^2(n x / 2) / n^2 )
inline double rho_upper(int n_cut, double x) {
  if (n_cut < 1) throw InvalidInput("rho_upper: N must be >= 1");
  SeriesSum s(n_cut);
  for (int n = 1; n <= n_cut; ++n) {
    const double c = (1.0 - double(n) / (n_cut + 1)) * std::sin(0.5 * n * x) / n;
    s.add(c * c);
  }
  return 2.0 * std::sqrt(2.0) * std::sqrt(s.value());
}

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

inline double geodesic_circle(double x, double y) {
  const double d = std::fmod(std::abs(x - y), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

inline double geodesic_plane(Complex z, Complex w) { return std::abs(z - w); }

/// Great-circle angle between points given by (polar, azimuth).
inline double geodesic_sphere(double polar1, double azimuth1, double polar2, double azimuth2) {
  const double dot = std::sin(polar1) * std::sin(polar2) * std::cos(azimuth1 - azimuth2) +
                     std::cos(polar1) * std::cos(polar2);
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

/// Bounds on the circle distance between Fejer states at separation x:
/// [rho_N(x), min(rho'_N(x), d_geo)].
inline BoundPair circle_bounds(int n_cut, double x) {
  return {rho_lower(n_cut, x), std::min(rho_upper(n_cut, x), geodesic_circle(x, 0.0))};
}

/// F_N(t) = (1/N) (sin(N t/2) / sin(t/2))^2, with the limit N at t = 0 mod 2 pi.
inline double fejer_kernel(int n, double t) {
  if (n < 1) throw InvalidInput("fejer_kernel: N must be >= 1");
  const double s = std::sin(0.5 * t);
  if (std::abs(s) < 1e-8) {
    // Series near the pole avoids 0/0: F_N(t) = N - N(N^2-1) t'^2/12 + O(t'^4).
    const double tp = std::remainder(t, 2.0 * kPi);
    return n - n * (double(n) * n - 1.0) * tp * tp / 12.0;
  }
  const double r = std::sin(0.5 * n * t) / s;
  return r * r / n;
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 4096) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  CompensatedSum s;
  s.add(f(a));
  s.add(f(b));
  for (int k = 1; k < panels; ++k) s.add((k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h));
  return s.value() * h / 3.0;
}

/// (2 pi)^-1 int_{-pi}^{pi} f(t) F_{N+1}(x - t) dt
inline double fejer_average(const std::function<double(double)>& f, int n, double x, int panels = 4096) {
  return simpson([&](double t) { return f(t) * fejer_kernel(n + 1, x - t); }, -kPi, kPi, panels) / (2.0 * kPi);
}

/// K_z(xi) = theta^-1 exp(-|z - xi|^2 / theta)
inline double berezin_plane_kernel(double theta, Complex z, Complex xi) {
  if (!(theta > 0.0)) throw InvalidInput("berezin_plane_kernel: theta must be positive");
  return std::exp(-std::norm(z - xi) / theta) / theta;
}

/// (pi / 2^(gamma+2)) binom(2 gamma, gamma) with gamma = 2 ell + 1.
inline double berezin_sphere_bound(int two_ell) {
  if (two_ell < 1) throw InvalidInput("berezin_sphere_bound: 2*ell must be >= 1");
  const int gamma = two_ell + 1;
  return kPi * std::exp(log_binomial(2 * gamma, gamma) - (gamma + 2) * std::log(2.0));
}

/// Same coefficient as a function of gamma directly (gamma >= 1).
inline double berezin_sphere_coefficient(int gamma) {
  if (gamma < 1) throw InvalidInput("berezin_sphere_coefficient: gamma must be >= 1");
  return kPi * std::exp(log_binomial(2 * gamma, gamma) - (gamma + 2) * std::log(2.0));
}

/// int K_x(y) d_geo(x, y) dy for the spin-l Berezin kernel gamma cos^{4l}(theta/2),
/// which is pi binom(2 gamma, gamma) / 4^gamma. It agrees with the coefficient
/// above only at gamma = 2 and decays like sqrt(pi / gamma).
inline double berezin_sphere_mean_distance(int two_ell) {
  if (two_ell < 1) throw InvalidInput("berezin_sphere_mean_distance: 2*ell must be >= 1");
  const int gamma = two_ell + 1;
  return kPi * std::exp(log_binomial(2 * gamma, gamma) - 2.0 * gamma * std::log(2.0));
}

/// exp(-r) sum_{n > n_max} r^n / n!  with r = |z|^2 / theta: the norm^2 a
/// Fock coherent vector loses when cut at level n_max.
inline double coherent_tail(double theta, int n_max, Complex z) {
  const double r = std::norm(z) / theta;
  if (r == 0.0) return 0.0;
  double log_term = (n_max + 1) * std::log(r) - std::lgamma(n_max + 2.0) - r;
  CompensatedSum s;
  for (int n = n_max + 1; n < n_max + 100000; ++n) {
    const double term = std::exp(log_term);
    s.add(term);
    if (n > r && term < 1e-18 * s.value()) break;
    log_term += std::log(r) - std::log(n + 1.0);
  }
  return s.value();
}

}  // namespace specdist::oracle
