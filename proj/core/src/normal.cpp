#include "boundsci/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(what) + ": argument must be finite");
  }
}

// Wichura (1988), algorithm AS 241 (PPND16). Relative accuracy about 1e-16
// before refinement.
double as241(double p) noexcept {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
               6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
             1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
           1.3314166789178437745e+2) * r + 3.3871328727963666080e+0));
    const double den =
        ((((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
               3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
             5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
           4.2313330701600911252e+1) * r + 1.0));
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

// Lower-tail quantile for p <= 0.5, polished by two Newton steps on Phi.
double lower_quantile(double p) noexcept {
  double x = as241(p);
  for (int step = 0; step < 2; ++step) {
    const double density = detail::pdf(x);
    if (density <= 0.0) break;
    x -= (detail::cdf(x) - p) / density;
  }
  return x;
}

// Gauss-Legendre half-rules used by the bivariate normal integral (Genz 2004).
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384,
                                       0.4679139345726904};
constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647,
                                       0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183,
                                        0.1600783285433464,  0.2031674267230659,
                                        0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 6> kX12 = {0.9815606342467191, 0.9041172563704750,
                                        0.7699026741943050, 0.5873179542866171,
                                        0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 10> kW20 = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
    0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
    0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
    0.1527533871307259};
constexpr std::array<double, 10> kX20 = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
    0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
    0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
    0.07652652113349733};

}  // namespace

Correlation::Correlation(double rho) {
  if (!std::isfinite(rho) || rho < -1.0 - kClampBand || rho > 1.0 + kClampBand) {
    throw DomainError("correlation must lie in [-1, 1], got " + std::to_string(rho));
  }
  rho_ = std::clamp(rho, -1.0, 1.0);
}

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return detail::pdf(x);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return detail::cdf(x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0, 1)");
  }
  // 1 - p is exact for p >= 0.5, so the symmetry holds to rounding.
  return p <= 0.5 ? lower_quantile(p) : -lower_quantile(1.0 - p);
}

namespace detail {

double bvn_upper(double h, double k, double r) noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (h == inf || k == inf) return 0.0;
  if (h == -inf) return k == -inf ? 1.0 : cdf(-k);
  if (k == -inf) return cdf(-h);
  if (r == 0.0) return cdf(-h) * cdf(-k);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::span<const double> w;
  std::span<const double> x;
  const double abs_r = std::fabs(r);
  if (abs_r < 0.3) {
    w = kW6;
    x = kX6;
  } else if (abs_r < 0.75) {
    w = kW12;
    x = kX12;
  } else {
    w = kW20;
    x = kX20;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (abs_r < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (const double node : {1.0 - x[i], 1.0 + x[i]}) {
        const double sn = std::sin(asr * node);
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / two_pi + cdf(-h) * cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (abs_r < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0) {
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(two_pi) * cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double sum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        for (const double node : {1.0 - x[i], 1.0 + x[i]}) {
          const double xs = (a * node) * (a * node);
          asr = -0.5 * (bs / xs + hk);
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double rs = std::sqrt(1.0 - xs);
            const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
            sum += w[i] * std::exp(asr) * (sp - ep);
          }
        }
      }
      bvn = (a * sum - bvn) / two_pi;
    }
    if (r > 0.0) {
      bvn += cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? cdf(k) - cdf(h) : cdf(-h) - cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace detail

double bivariate_rect_prob(double z1_hi, double z2_lo, Correlation rho) {
  if (std::isnan(z1_hi) || std::isnan(z2_lo)) {
    throw DomainError("bivariate_rect_prob: NaN bound");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (z1_hi == -inf || z2_lo == inf) return 0.0;
  const double r = rho.value();

  if (r >= 1.0 - kDegenerateRhoBand) {
    // Z2 = Z1: the event is z2_lo <= Z <= z1_hi.
    if (z2_lo >= z1_hi) return 0.0;
    if (z2_lo > 0.0) return detail::cdf(-z2_lo) - detail::cdf(-z1_hi);
    return detail::cdf(z1_hi) - detail::cdf(z2_lo);
  }
  if (r <= -1.0 + kDegenerateRhoBand) {
    // Z2 = -Z1: the event is Z1 <= min(z1_hi, -z2_lo).
    return detail::cdf(std::min(z1_hi, -z2_lo));
  }
  if (r == 0.0) return detail::cdf(z1_hi) * detail::cdf(-z2_lo);
  // P(-Z1 >= -z1_hi, Z2 >= z2_lo) with corr(-Z1, Z2) = -rho.
  return detail::bvn_upper(-z1_hi, z2_lo, -r);
}

}  // namespace boundsci
