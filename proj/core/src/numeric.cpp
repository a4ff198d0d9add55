#include "eskew/numeric.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eskew {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kTwoPi = 6.2831853071795864769;

// Seam between the direct phi/Phi evaluation and the Mills-ratio continued
// fraction. Below this point erfc still has full relative accuracy, and the
// continued fraction already converges to machine precision, so the two
// branches agree to ~1e-16 at the crossover.
constexpr double kZetaTailCut = -8.0;

// zeta1(x) for x <= kZetaTailCut via the Mills-ratio continued fraction
//   Phi(-t)/phi(t) = 1/(t + 1/(t + 2/(t + 3/(...)))),  t = -x > 0,
// evaluated by backward recurrence. Depth 40 is converged to <1e-16 for all
// t >= 8 (the term magnitudes decay like k/(2t^2)); no exponentials appear,
// so the branch cannot underflow for any finite x.
double zeta1_tail(double x) {
    const double t = -x;
    double tail = 0.0;
    for (int k = 40; k >= 1; --k) {
        tail = static_cast<double>(k) / (t + tail);
    }
    return t + tail;
}

// Gauss-Legendre nodes/weights on [-1, 1], orders 6/12/20; order selected by
// |rho| as in the Drezner-Wesolowsky/Genz scheme.
constexpr double kGlX6[] = {
    -9.32469514203152050e-01, -6.61209386466264482e-01, -2.38619186083196932e-01,
    2.38619186083196932e-01,  6.61209386466264482e-01,  9.32469514203152050e-01};
constexpr double kGlW6[] = {
    1.71324492379169746e-01, 3.60761573048138939e-01, 4.67913934572691370e-01,
    4.67913934572691370e-01, 3.60761573048138939e-01, 1.71324492379169746e-01};
constexpr double kGlX12[] = {
    -9.81560634246719244e-01, -9.04117256370474798e-01, -7.69902674194304693e-01,
    -5.87317954286617483e-01, -3.67831498998180184e-01, -1.25233408511468913e-01,
    1.25233408511468913e-01,  3.67831498998180184e-01,  5.87317954286617483e-01,
    7.69902674194304693e-01,  9.04117256370474798e-01,  9.81560634246719244e-01};
constexpr double kGlW12[] = {
    4.71753363865120220e-02, 1.06939325995318885e-01, 1.60078328543346110e-01,
    2.03167426723065647e-01, 2.33492536538354639e-01, 2.49147045813402690e-01,
    2.49147045813402690e-01, 2.33492536538354639e-01, 2.03167426723065647e-01,
    1.60078328543346110e-01, 1.06939325995318885e-01, 4.71753363865120220e-02};
constexpr double kGlX20[] = {
    -9.93128599185094885e-01, -9.63971927277913809e-01, -9.12234428251325835e-01,
    -8.39116971822218782e-01, -7.46331906460150796e-01, -6.36053680726515025e-01,
    -5.10867001950827126e-01, -3.73706088715419549e-01, -2.27785851141645096e-01,
    -7.65265211334973383e-02, 7.65265211334973383e-02,  2.27785851141645096e-01,
    3.73706088715419549e-01,  5.10867001950827126e-01,  6.36053680726515025e-01,
    7.46331906460150796e-01,  8.39116971822218782e-01,  9.12234428251325835e-01,
    9.63971927277913809e-01,  9.93128599185094885e-01};
constexpr double kGlW20[] = {
    1.76140071391532732e-02, 4.06014298003862170e-02, 6.26720483341094425e-02,
    8.32767415767046715e-02, 1.01930119817240261e-01, 1.18194531961518245e-01,
    1.31688638449176526e-01, 1.42096109318381875e-01, 1.49172986472603658e-01,
    1.52753387130725782e-01, 1.52753387130725782e-01, 1.49172986472603658e-01,
    1.42096109318381875e-01, 1.31688638449176526e-01, 1.18194531961518245e-01,
    1.01930119817240261e-01, 8.32767415767046715e-02, 6.26720483341094425e-02,
    4.06014298003862170e-02, 1.76140071391532732e-02};

void select_gl_table(double abs_rho, const double** x, const double** w,
                     int* n) {
    if (abs_rho < 0.3) {
        *x = kGlX6;
        *w = kGlW6;
        *n = 6;
    } else if (abs_rho < 0.75) {
        *x = kGlX12;
        *w = kGlW12;
        *n = 12;
    } else {
        *x = kGlX20;
        *w = kGlW20;
        *n = 20;
    }
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double zeta1(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("zeta1: input must be finite");
    }
    if (x < kZetaTailCut) return zeta1_tail(x);
    return norm_pdf(x) / norm_cdf(x);
}

double zeta2(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("zeta2: input must be finite");
    }
    const double z = zeta1(x);
    return -z * (x + z);
}

double log_norm_cdf(double x) {
    if (x >= 0.0) {
        // log(1 - Phi(-x)); Phi(-x) <= 1/2 so log1p is exact here.
        return std::log1p(-0.5 * std::erfc(x / kSqrt2));
    }
    if (x >= kZetaTailCut) {
        return std::log(0.5 * std::erfc(-x / kSqrt2));
    }
    // Phi(x) = phi(x)/zeta1(x); both factors are computed without underflow.
    return -0.5 * x * x - kLogSqrt2Pi - std::log(zeta1_tail(x));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("norm_quantile: p must be in (0, 1)");
    }
    if (p < 0.5) return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
    return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double bvn_cdf(double x, double y, double rho) {
    if (std::isnan(x) || std::isnan(y) || std::isnan(rho) ||
        std::abs(rho) > 1.0) {
        throw std::invalid_argument("bvn_cdf: need finite h, k and |rho| <= 1");
    }
    if (rho == 1.0) return norm_cdf(std::min(x, y));
    if (rho == -1.0) return std::max(0.0, norm_cdf(x) + norm_cdf(y) - 1.0);
    if (x == -std::numeric_limits<double>::infinity() ||
        y == -std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    if (x == std::numeric_limits<double>::infinity()) return norm_cdf(y);
    if (y == std::numeric_limits<double>::infinity()) return norm_cdf(x);

    const double* gx;
    const double* gw;
    int ng;
    select_gl_table(std::abs(rho), &gx, &gw, &ng);

    double h = -x;
    double k = -y;
    double hk = h * k;
    double bvn = 0.0;

    if (std::abs(rho) < 0.925) {
        if (rho != 0.0) {
            const double hs = 0.5 * (h * h + k * k);
            const double asr = std::asin(rho);
            for (int i = 0; i < ng; ++i) {
                const double sn = std::sin(asr * (gx[i] + 1.0) / 2.0);
                bvn += gw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
            bvn *= asr / (2.0 * kTwoPi);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }

    // |rho| >= 0.925: Genz's tail expansion plus a corrective integral.
    if (rho < 0.0) {
        k = -k;
        hk = -hk;
    }
    const double ass = (1.0 - rho) * (1.0 + rho);
    double a = std::sqrt(ass);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -0.5 * (bs / ass + hk);
    if (asr > -100.0) {
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - ass) * (1.0 - d * bs / 5.0) / 3.0 +
               c * d * ass * ass / 5.0);
    }
    if (-hk < 100.0) {
        const double b = std::sqrt(bs);
        bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
               (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < ng; ++i) {
        const double xs_lin = a * (gx[i] + 1.0);
        const double xs = xs_lin * xs_lin;
        asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0) {
            const double rs = std::sqrt(1.0 - xs);
            const double sp = 1.0 + c * xs * (1.0 + d * xs);
            const double ep =
                std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
            bvn += a * gw[i] * std::exp(asr) * (ep - sp);
        }
    }
    bvn = -bvn / kTwoPi;
    if (rho > 0.0) {
        return bvn + norm_cdf(-std::max(h, k));
    }
    bvn = -bvn;
    if (k > h) {
        // Phi(k) - Phi(h), evaluated in whichever tail keeps full accuracy.
        if (h < 0.0) {
            bvn += norm_cdf(k) - norm_cdf(h);
        } else {
            bvn += norm_cdf(-h) - norm_cdf(-k);
        }
    }
    return bvn;
}

TruncatedConditional::TruncatedConditional(double alpha_, double beta_,
                                           double tau_)
    : alpha(alpha_), beta(beta_), theta((alpha_ + tau_) / beta_), tau(tau_) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(tau)) {
        throw std::invalid_argument(
            "TruncatedConditional: parameters must be finite");
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("TruncatedConditional: beta must be > 0");
    }
}

std::pair<double, double> trunc_norm_moments(const TruncatedConditional& cond) {
    const double z = zeta1(cond.theta);
    const double m1 = cond.alpha + cond.beta * z;
    const double m2 = cond.alpha * cond.alpha + cond.beta * cond.beta +
                      (cond.alpha - cond.tau) * cond.beta * z;
    return {m1, m2};
}

double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
    if (!(lo < hi)) {
        throw std::invalid_argument("golden_section_min: need lo < hi");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("golden_section_min: tol must be > 0");
    }
    constexpr double kInvPhi = 0.61803398874989484820;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace eskew
