#pragma once

// Gaver-Stehfest inversion of Laplace transforms sampled on the positive
// real axis:
//
//     f(t) ~ (ln 2 / t) * sum_{k=1..n} V_k F(k ln 2 / t)
//
// The weights alternate in sign and grow like 10^(n/2); in double precision
// orders above 20 lose every significant digit to cancellation.

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "fracflow/errors.hpp"

namespace fracflow {

inline constexpr int kDefaultStehfestOrder = 12;
inline constexpr int kMaxStehfestOrder = 20;

/// Stehfest weights V_1..V_n, accumulated in at least long double precision.
template <typename Scalar = double>
std::vector<Scalar> stehfest_weights(int n)
{
    if (n < 2 || n > kMaxStehfestOrder || n % 2 != 0) {
        throw std::domain_error("stehfest_weights: order must be even and within [2, " +
                                std::to_string(kMaxStehfestOrder) + "], got " + std::to_string(n));
    }
    using Wide = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;
    std::vector<Wide> fact(static_cast<std::size_t>(2 * n + 1));
    fact[0] = 1;
    for (std::size_t i = 1; i < fact.size(); ++i) {
        fact[i] = fact[i - 1] * Wide(i);
    }
    const int half = n / 2;
    std::vector<Scalar> weights(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        Wide sum = 0;
        for (int k = (i + 1) / 2; k <= std::min(i, half); ++k) {
            Wide num = fact[static_cast<std::size_t>(2 * k)];
            for (int e = 0; e < half; ++e) {
                num *= Wide(k);
            }
            const Wide den = fact[static_cast<std::size_t>(half - k)] * fact[static_cast<std::size_t>(k)] *
                             fact[static_cast<std::size_t>(k - 1)] * fact[static_cast<std::size_t>(i - k)] *
                             fact[static_cast<std::size_t>(2 * k - i)];
            sum += num / den;
        }
        weights[static_cast<std::size_t>(i - 1)] = static_cast<Scalar>(((half + i) % 2 == 0) ? sum : -sum);
    }
    return weights;
}

template <typename Scalar = double>
class StehfestScheme {
public:
    explicit StehfestScheme(int n = kDefaultStehfestOrder) : n_(n), weights_(stehfest_weights<Scalar>(n)) {}

    int order() const { return n_; }
    const std::vector<Scalar>& weights() const { return weights_; }

private:
    int n_;
    std::vector<Scalar> weights_;
};

/// Inverse transform of `transform` at time t. Any exception thrown by the
/// evaluator is rethrown nested inside an EvaluationError naming u and t.
template <typename Scalar, typename Transform>
Scalar invert(Transform&& transform, Scalar t, const StehfestScheme<Scalar>& scheme)
{
    if (!(t > Scalar(0)) || !std::isfinite(t)) {
        throw std::domain_error("invert: t must be positive and finite");
    }
    const Scalar step = std::numbers::ln2_v<Scalar> / t;
    const auto& w = scheme.weights();
    Scalar sum = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const Scalar u = Scalar(k + 1) * step;
        Scalar value;
        try {
            value = transform(u);
        } catch (...) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "transform evaluation failed at u = " << static_cast<double>(u)
                << " (t = " << static_cast<double>(t) << ")";
            std::throw_with_nested(EvaluationError(msg.str()));
        }
        sum += w[k] * value;
    }
    return step * sum;
}

/// Pointwise inversion over a strictly increasing positive grid. With
/// threads > 1 the grid is split into contiguous chunks evaluated
/// concurrently; results do not depend on the thread count.
template <typename Scalar, typename Transform>
std::vector<Scalar> invert_curve(Transform&& transform, std::span<const Scalar> t_grid,
                                 const StehfestScheme<Scalar>& scheme, unsigned threads = 1)
{
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > Scalar(0)) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
            throw std::domain_error("invert_curve: time grid must be positive and strictly increasing");
        }
    }
    std::vector<Scalar> out(t_grid.size());
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = invert(transform, t_grid[i], scheme);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(t_grid.size(), 1));
    if (workers <= 1) {
        run(0, t_grid.size());
        return out;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (t_grid.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < t_grid.size(); begin += chunk) {
        jobs.push_back(std::async(std::launch::async, run, begin, std::min(begin + chunk, t_grid.size())));
    }
    for (auto& job : jobs) {
        job.get();
    }
    return out;
}

}  // namespace fracflow
