#pragma once

// Modified Bessel functions of the second kind, orders 0 and 1, for real
// positive arguments.
//
//   x <= 2 : ascending power series (digamma form)
//   x >  2 : Steed's continued fraction for the scaled pair e^x K0, e^x K1
//
// All routines are generic over the floating-point type.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracflow {

template <typename Scalar>
struct BesselEval {
    Scalar value;
    bool scaled;  // value holds e^x * K_nu(x)
};

namespace detail {

template <typename Scalar>
void check_bessel_argument(Scalar x, const char* name)
{
    if (!(x > Scalar(0)) || !std::isfinite(x)) {
        throw std::domain_error(std::string(name) + ": argument must be positive and finite, got " +
                                std::to_string(static_cast<double>(x)));
    }
}

inline constexpr double kSeriesCrossover = 2.0;

// (K0, K1) by the ascending series. Valid for any x > 0; only accurate for
// moderate x because the K0 series suffers cancellation as x grows.
template <typename Scalar>
std::pair<Scalar, Scalar> bessel_k01_series(Scalar x)
{
    using std::log;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar y = x * x / Scalar(4);
    const Scalar lg = log(x / Scalar(2)) + std::numbers::egamma_v<Scalar>;

    // K0 = -lg * I0 + sum_k y^k/(k!)^2 * H_k
    Scalar t0 = 1;
    Scalar i0 = 1;
    Scalar s0 = 0;
    // K1 = 1/x + (x/2) sum_k y^k/(k!(k+1)!) * (lg - (H_k + H_{k+1})/2)
    Scalar t1 = 1;
    Scalar harmonic = 0;
    Scalar s1 = lg - Scalar(0.5);
    for (int k = 1; k < 200; ++k) {
        const Scalar kk = Scalar(k);
        const Scalar next_harmonic = harmonic + Scalar(1) / kk;
        t0 *= y / (kk * kk);
        t1 *= y / (kk * (kk + Scalar(1)));
        i0 += t0;
        s0 += t0 * next_harmonic;
        const Scalar h_pair = next_harmonic + (next_harmonic + Scalar(1) / (kk + Scalar(1)));
        const Scalar d1 = t1 * (lg - h_pair / Scalar(2));
        s1 += d1;
        harmonic = next_harmonic;
        if (t0 * (next_harmonic + std::abs(lg)) < eps * std::abs(s0) * Scalar(0.25) &&
            std::abs(d1) < eps * std::abs(s1) * Scalar(0.25)) {
            break;
        }
    }
    const Scalar k0 = -lg * i0 + s0;
    const Scalar k1 = Scalar(1) / x + x / Scalar(2) * s1;
    return {k0, k1};
}

// (e^x K0, e^x K1) by Steed's algorithm applied to the continued fraction
// for K_{nu+1}/K_nu (Temme's normalization), nu = 0. Converges quickly for
// x >= 2 and is uniformly accurate up to the overflow limit.
template <typename Scalar>
std::pair<Scalar, Scalar> bessel_k01_scaled_cf(Scalar x)
{
    using std::sqrt;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar a1 = Scalar(0.25);
    Scalar b = Scalar(2) * (Scalar(1) + x);
    Scalar d = Scalar(1) / b;
    Scalar h = d;
    Scalar delh = d;
    Scalar q1 = 0;
    Scalar q2 = 1;
    Scalar q = a1;
    Scalar c = a1;
    Scalar a = -a1;
    Scalar s = Scalar(1) + q * delh;
    for (int i = 1; i < 100000; ++i) {
        const Scalar ii = Scalar(i);
        a -= Scalar(2) * ii;
        c = -a * c / (ii + Scalar(1));
        const Scalar qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += Scalar(2);
        d = Scalar(1) / (b + a * d);
        delh = (b * d - Scalar(1)) * delh;
        h += delh;
        const Scalar dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps / Scalar(4)) {
            break;
        }
    }
    h *= a1;
    const Scalar k0 = sqrt(std::numbers::pi_v<Scalar> / (Scalar(2) * x)) / s;
    const Scalar k1 = k0 * (x + Scalar(0.5) - h) / x;
    return {k0, k1};
}

// Scaled pair on the full positive axis.
template <typename Scalar>
std::pair<Scalar, Scalar> bessel_k01_scaled(Scalar x)
{
    if (x <= Scalar(kSeriesCrossover)) {
        auto [k0, k1] = bessel_k01_series(x);
        const Scalar ex = std::exp(x);
        return {k0 * ex, k1 * ex};
    }
    return bessel_k01_scaled_cf(x);
}

template <typename Scalar>
std::pair<Scalar, Scalar> bessel_k01(Scalar x)
{
    if (x <= Scalar(kSeriesCrossover)) {
        return bessel_k01_series(x);
    }
    auto [k0, k1] = bessel_k01_scaled_cf(x);
    const Scalar emx = std::exp(-x);
    return {k0 * emx, k1 * emx};
}

}  // namespace detail

/// K0(x) for x > 0. Underflows to zero for x beyond ~745 (double); use
/// bessel_k0_scaled there.
template <typename Scalar>
Scalar bessel_k0(Scalar x)
{
    detail::check_bessel_argument(x, "bessel_k0");
    return detail::bessel_k01(x).first;
}

/// K1(x) for x > 0.
template <typename Scalar>
Scalar bessel_k1(Scalar x)
{
    detail::check_bessel_argument(x, "bessel_k1");
    return detail::bessel_k01(x).second;
}

/// e^x K0(x); finite for every representable x > 0.
template <typename Scalar>
Scalar bessel_k0_scaled(Scalar x)
{
    detail::check_bessel_argument(x, "bessel_k0_scaled");
    return detail::bessel_k01_scaled(x).first;
}

/// e^x K1(x).
template <typename Scalar>
Scalar bessel_k1_scaled(Scalar x)
{
    detail::check_bessel_argument(x, "bessel_k1_scaled");
    return detail::bessel_k01_scaled(x).second;
}

template <typename Scalar>
BesselEval<Scalar> bessel_k0_eval(Scalar x, bool scaled)
{
    return {scaled ? bessel_k0_scaled(x) : bessel_k0(x), scaled};
}

template <typename Scalar>
BesselEval<Scalar> bessel_k1_eval(Scalar x, bool scaled)
{
    return {scaled ? bessel_k1_scaled(x) : bessel_k1(x), scaled};
}

}  // namespace fracflow
