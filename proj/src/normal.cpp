#include "biascorr/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace biascorr {

namespace {

// Rational Chebyshev coefficients for erf/erfc (W. J. Cody, Math. Comp. 1969).
constexpr double kErfA[5] = {3.1611237438705656, 113.864154151050156,
                             377.485237685302021, 3209.37758913846947,
                             0.185777706184603153};
constexpr double kErfB[4] = {23.6012909523441209, 244.024637934444173,
                             1282.61652607737228, 2844.23683343917062};
constexpr double kErfcC[9] = {0.564188496988670089, 8.88314979438837594,
                              66.1191906371416295,  298.635138197400131,
                              881.95222124176909,   1712.04761263407058,
                              2051.07837782607147,  1230.33935479799725,
                              2.15311535474403846e-8};
constexpr double kErfcD[8] = {15.7449261107098347, 117.693950891312499,
                              537.181101862009858, 1621.38957456669019,
                              3290.79923573345963, 4362.61909014324716,
                              3439.36767414372164, 1230.33935480374942};
constexpr double kErfcP[6] = {0.305326634961232344, 0.360344899949804439,
                              0.125781726111229246, 0.0160837851487422766,
                              6.58749161529837803e-4, 0.0163153871373020978};
constexpr double kErfcQ[5] = {2.56852019228982242, 1.87295284992346047,
                              0.527905102951428412, 0.0605183413124413191,
                              0.00233520497626869185};

constexpr double kSqrPi = 0.56418958354775628695;  // 1/sqrt(pi)
constexpr double kThresh = 0.46875;
constexpr double kXBig = 26.543;
constexpr double kXSmall = 1.11e-16;

// erf(x) for |x| <= 0.46875 (odd in x, exact symmetry by construction)
double erf_small(double x) {
    const double y = std::fabs(x);
    const double ysq = (y > kXSmall) ? y * y : 0.0;
    double xnum = kErfA[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
        xnum = (xnum + kErfA[i]) * ysq;
        xden = (xden + kErfB[i]) * ysq;
    }
    return x * (xnum + kErfA[3]) / (xden + kErfB[3]);
}

// erfc(y) for y > 0.46875; caller handles negative arguments via 2 - erfc(y)
double erfc_positive(double y) {
    double result;
    if (y <= 4.0) {
        double xnum = kErfcC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kErfcC[i]) * y;
            xden = (xden + kErfcD[i]) * y;
        }
        result = (xnum + kErfcC[7]) / (xden + kErfcD[7]);
    } else if (y < kXBig) {
        const double ysq = 1.0 / (y * y);
        double xnum = kErfcP[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + kErfcP[i]) * ysq;
            xden = (xden + kErfcQ[i]) * ysq;
        }
        result = ysq * (xnum + kErfcP[4]) / (xden + kErfcQ[4]);
        result = (kSqrPi - result) / y;
    } else {
        return 0.0;
    }
    // split exp(-y^2) to keep the argument of each exp small and exact
    const double ytrunc = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ytrunc) * (y + ytrunc);
    return std::exp(-ytrunc * ytrunc) * std::exp(-del) * result;
}

double erfc_cody(double x) {
    const double y = std::fabs(x);
    if (y <= kThresh) {
        return 1.0 - erf_small(x);
    }
    const double r = erfc_positive(y);
    return (x < 0.0) ? 2.0 - r : r;
}

}  // namespace

double std_normal_cdf(double z) {
    if (!std::isfinite(z)) {
        throw std::domain_error("std_normal_cdf: non-finite argument");
    }
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    return 0.5 * erfc_cody(-z * inv_sqrt2);
}

double std_normal_pdf(double z) {
    if (!std::isfinite(z)) {
        throw std::domain_error("std_normal_pdf: non-finite argument");
    }
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("std_normal_quantile: p must lie in (0,1)");
    }
    // Acklam's rational approximation, then two Newton corrections
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = std_normal_cdf(x) - p;
        x -= e / std_normal_pdf(x);
    }
    return x;
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_hermite: node count must be positive");
    }
    GaussHermite out;
    out.nodes.assign(n, 0.0);
    out.weights.assign(n, 0.0);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    double pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * out.nodes[n - 1];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * out.nodes[n - 2];
        } else {
            z = 2.0 * z - out.nodes[n - i + 1];
        }
        for (int its = 0; its < 100; ++its) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-14) break;
        }
        out.nodes[n - 1 - i] = z;
        out.nodes[i] = -z;
        out.weights[n - 1 - i] = 2.0 / (pp * pp);
        out.weights[i] = out.weights[n - 1 - i];
    }
    return out;
}

}  // namespace biascorr
