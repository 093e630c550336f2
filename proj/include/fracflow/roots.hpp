#pragma once

// Real cubic solver and the positive-root extraction used by the
// characteristic equation (a cubic in x = alpha^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fracflow/errors.hpp"

namespace fracflow {

/// c3 x^3 + c2 x^2 + c1 x + c0
template <typename Scalar>
struct CubicCoefficients {
    Scalar c3{};
    Scalar c2{};
    Scalar c1{};
    Scalar c0{};

    Scalar operator()(Scalar x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
    Scalar derivative(Scalar x) const { return (Scalar(3) * c3 * x + Scalar(2) * c2) * x + c1; }

    /// Largest magnitude among the four terms at x; the scale residuals are measured against.
    Scalar term_scale(Scalar x) const
    {
        using std::abs;
        return std::max({abs(c3 * x * x * x), abs(c2 * x * x), abs(c1 * x), abs(c0)});
    }
};

template <typename Scalar>
struct CubicRoots {
    std::vector<Scalar> real;                  // ascending
    std::vector<std::complex<Scalar>> complex;  // roots classified as genuinely complex
};

template <typename Scalar>
struct AlphaRoots {
    std::array<Scalar, 3> alpha{};     // ascending, alpha_i = sqrt(x_i)
    std::array<Scalar, 3> residual{};  // cubic evaluated at x_i = alpha_i^2
};

inline constexpr double kComplexRootTolerance = 1e-9;
inline constexpr double kRootMergeGap = 1e-9;

namespace detail {

template <typename Scalar>
Scalar polish_root(const CubicCoefficients<Scalar>& c, Scalar x)
{
    using std::abs;
    Scalar best = x;
    Scalar best_res = abs(c(x));
    for (int it = 0; it < 8 && best_res > Scalar(0); ++it) {
        const Scalar dp = c.derivative(best);
        if (dp == Scalar(0) || !std::isfinite(dp)) {
            break;
        }
        const Scalar candidate = best - c(best) / dp;
        const Scalar res = abs(c(candidate));
        if (!(res < best_res)) {
            break;
        }
        best = candidate;
        best_res = res;
    }
    return best;
}

// Collapse neighbours whose relative gap is below kRootMergeGap onto their mean.
template <typename Scalar>
void merge_close_roots(std::vector<Scalar>& roots)
{
    using std::abs;
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        std::size_t j = i + 1;
        Scalar sum = roots[i];
        while (j < roots.size() &&
               abs(roots[j] - roots[i]) <= Scalar(kRootMergeGap) * std::max(abs(roots[j]), abs(roots[i]))) {
            sum += roots[j];
            ++j;
        }
        if (j > i + 1) {
            const Scalar mean = sum / Scalar(j - i);
            for (std::size_t k = i; k < j; ++k) {
                roots[k] = mean;
            }
            i = j - 1;
        }
    }
}

}  // namespace detail

/// All three roots of a cubic. Roots with |Im| <= 1e-9 (1 + |Re|) count as real;
/// real roots are Newton-polished and sorted.
template <typename Scalar>
CubicRoots<Scalar> solve_cubic_real(const CubicCoefficients<Scalar>& c)
{
    using std::abs;
    using std::acos;
    using std::cbrt;
    using std::cos;
    using std::sqrt;
    if (!(abs(c.c3) > Scalar(1e-300))) {
        throw std::domain_error("solve_cubic_real: degenerate leading coefficient");
    }
    const Scalar a = c.c2 / c.c3;
    const Scalar b = c.c1 / c.c3;
    const Scalar d = c.c0 / c.c3;
    const Scalar shift = a / Scalar(3);
    const Scalar q = (a * a - Scalar(3) * b) / Scalar(9);
    const Scalar r = (a * (Scalar(2) * a * a - Scalar(9) * b) + Scalar(27) * d) / Scalar(54);
    const Scalar r2 = r * r;
    const Scalar q3 = q * q * q;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    std::vector<std::complex<Scalar>> raw;
    if (r2 < q3) {
        const Scalar theta = acos(std::clamp(r / sqrt(q3), Scalar(-1), Scalar(1)));
        const Scalar m = Scalar(-2) * sqrt(q);
        const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
        raw.emplace_back(m * cos(theta / Scalar(3)) - shift, Scalar(0));
        raw.emplace_back(m * cos((theta + two_pi) / Scalar(3)) - shift, Scalar(0));
        raw.emplace_back(m * cos((theta - two_pi) / Scalar(3)) - shift, Scalar(0));
    } else {
        const Scalar disc = r2 - q3;
        if (disc <= Scalar(64) * eps * std::max(r2, abs(q3))) {
            // r^2 == q^3 up to rounding: a double root, not a complex pair.
            const Scalar s = -cbrt(r);
            raw.emplace_back(Scalar(2) * s - shift, Scalar(0));
            raw.emplace_back(-s - shift, Scalar(0));
            raw.emplace_back(-s - shift, Scalar(0));
        } else {
            const Scalar sgn = r < Scalar(0) ? Scalar(-1) : Scalar(1);
            const Scalar big = -sgn * cbrt(abs(r) + sqrt(disc));
            const Scalar small = big == Scalar(0) ? Scalar(0) : q / big;
            raw.emplace_back(big + small - shift, Scalar(0));
            const Scalar re = -(big + small) / Scalar(2) - shift;
            const Scalar im = sqrt(Scalar(3)) / Scalar(2) * (big - small);
            raw.emplace_back(re, im);
            raw.emplace_back(re, -im);
        }
    }

    // The closed forms carry an absolute error of ~eps |x_max|, which wipes
    // out roots much smaller than the dominant one. Rebuild those from
    // Vieta's relations around the (accurate) dominant real root instead.
    std::size_t dom = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (raw[i].imag() == Scalar(0) && abs(raw[i].real()) > abs(raw[dom].real())) {
            dom = i;
        }
    }
    const Scalar x1 = detail::polish_root(c, raw[dom].real());
    Scalar rest = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i != dom) {
            rest = std::max(rest, std::abs(raw[i]));
        }
    }
    if (x1 != Scalar(0) && rest < Scalar(1e-2) * abs(x1)) {
        const Scalar prod = -c.c0 / (c.c3 * x1);
        const Scalar sum = (c.c1 / c.c3 - prod) / x1;
        const Scalar qd = sum * sum - Scalar(4) * prod;
        raw.assign(1, {x1, Scalar(0)});
        if (qd >= Scalar(0)) {
            const Scalar big = (sum + (sum < Scalar(0) ? -sqrt(qd) : sqrt(qd))) / Scalar(2);
            raw.emplace_back(big, Scalar(0));
            raw.emplace_back(big == Scalar(0) ? Scalar(0) : prod / big, Scalar(0));
        } else {
            raw.emplace_back(sum / Scalar(2), sqrt(-qd) / Scalar(2));
            raw.emplace_back(sum / Scalar(2), -sqrt(-qd) / Scalar(2));
        }
    }

    // A double root perturbed by rounding splits into a conjugate pair with
    // |Im| ~ sqrt(eps) |x|. The cubic then still vanishes at the real part to
    // within its own evaluation error, which a genuine pair never does.
    for (auto& z : raw) {
        if (z.imag() != Scalar(0)) {
            const Scalar x = z.real();
            const Scalar terms = abs(c.c3 * x * x * x) + abs(c.c2 * x * x) + abs(c.c1 * x) + abs(c.c0);
            if (abs(c(x)) <= Scalar(64) * eps * terms) {
                z = {x, Scalar(0)};
            }
        }
    }

    CubicRoots<Scalar> out;
    for (const auto& z : raw) {
        if (abs(z.imag()) <= Scalar(kComplexRootTolerance) * (Scalar(1) + abs(z.real()))) {
            out.real.push_back(z.real());
        } else {
            out.complex.push_back(z);
        }
    }
    for (auto& x : out.real) {
        x = detail::polish_root(c, x);
    }
    std::sort(out.real.begin(), out.real.end());
    detail::merge_close_roots(out.real);
    return out;
}

/// The three positive roots x_i of the characteristic cubic, returned as
/// alpha_i = sqrt(x_i). Throws RootClassificationError when a root is complex
/// or non-positive; `u` is only used for the message.
template <typename Scalar>
AlphaRoots<Scalar> alpha_roots(const CubicCoefficients<Scalar>& c, Scalar u = Scalar(0))
{
    const CubicRoots<Scalar> roots = solve_cubic_real(c);
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "alpha_roots: " << what;
        if (u > Scalar(0)) {
            msg << " at u = " << static_cast<double>(u);
        }
        throw RootClassificationError(msg.str());
    };
    if (!roots.complex.empty()) {
        const auto& z = roots.complex.front();
        std::ostringstream s;
        s.precision(17);
        s << "complex root " << static_cast<double>(z.real()) << (z.imag() < 0 ? " - " : " + ")
          << static_cast<double>(std::abs(z.imag())) << "i";
        fail(s.str());
    }
    AlphaRoots<Scalar> out;
    for (std::size_t i = 0; i < 3; ++i) {
        const Scalar x = roots.real[i];
        if (!(x > Scalar(0))) {
            std::ostringstream s;
            s.precision(17);
            s << "non-positive root x = " << static_cast<double>(x);
            fail(s.str());
        }
        out.alpha[i] = std::sqrt(x);
        out.residual[i] = c(out.alpha[i] * out.alpha[i]);
    }
    return out;
}

}  // namespace fracflow
