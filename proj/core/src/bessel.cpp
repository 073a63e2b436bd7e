#include "gpdiscrim/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gpdiscrim {
namespace {

constexpr double kEps = 1.0e-16;
constexpr int kMaxIter = 10000;

// gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu)
// gam2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)] / 2
// gampl = 1/Gamma(1+mu), gammi = 1/Gamma(1-mu), for |mu| <= 1/2.
void reciprocal_gamma_pair(double mu, double& gam1, double& gam2,
                           double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  gam2 = 0.5 * (gammi + gampl);
  if (std::fabs(mu) > 1.0e-3) {
    gam1 = (gammi - gampl) / (2.0 * mu);
  } else {
    // Odd part of the 1/Gamma(1+x) Taylor series; stable through mu = 0.
    const double a1 = 0.57721566490153286061;
    const double a3 = -0.04200263503409523553;
    const double a5 = -0.00421977345555443367;
    const double mu2 = mu * mu;
    gam1 = -(a1 + mu2 * (a3 + mu2 * a5));
  }
}

}  // namespace

double log_bessel_k(double nu, double x) {
  if (!(nu > 0.0) || nu > 50.0)
    throw std::invalid_argument("log_bessel_k: order " + std::to_string(nu) +
                                " outside supported range (0, 50]");
  if (!(x > 0.0) || x >= 1.5e4)
    throw std::invalid_argument("log_bessel_k: argument " + std::to_string(x) +
                                " outside supported range (0, 1.5e4)");

  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;  // in [-1/2, 1/2]
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;

  double kmu = 0.0, kmu1 = 0.0;  // K_mu, K_{mu+1}, up to exp(log_offset)
  double log_offset = 0.0;

  if (x < 2.0) {
    // Temme's series.
    const double x2 = 0.5 * x;
    const double pimu = M_PI * mu;
    const double fact =
        (std::fabs(pimu) < kEps) ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = (std::fabs(e) < kEps) ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    reciprocal_gamma_pair(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    if (i > kMaxIter)
      throw std::runtime_error("log_bessel_k: series failed to converge");
    kmu = sum;
    kmu1 = sum1 * 2.0 * xi;
  } else {
    // Steed's continued fraction CF2, evaluated for exp(x)*K_mu(x).
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
      a -= 2 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::fabs(dels / s) < kEps) break;
    }
    if (i > kMaxIter)
      throw std::runtime_error(
          "log_bessel_k: continued fraction failed to converge");
    h = a1 * h;
    kmu = std::sqrt(M_PI / (2.0 * x)) / s;  // exp(x) * K_mu(x)
    kmu1 = kmu * (mu + x + 0.5 - h) * xi;
    log_offset = -x;
  }

  // Upward recurrence K_{m+1} = (2m/x) K_m + K_{m-1}, rescaled on the fly.
  for (int i = 1; i <= nl; ++i) {
    const double knext = (mu + i) * 2.0 * xi * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = knext;
    if (kmu1 > 1.0e250) {
      kmu *= 1.0e-250;
      kmu1 *= 1.0e-250;
      log_offset += 250.0 * M_LN10;
    }
  }
  return std::log(kmu) + log_offset;
}

double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

}  // namespace gpdiscrim
