// Copyright 2026 The pdistill Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file numeric.hpp
 * Small derivative-free root finding and least-squares helpers.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

namespace pdistill {

/// Bisection on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F &&f, double lo, double hi, double tolerance = 1e-10, int max_iter = 200) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw std::domain_error("bisect: no sign change on the bracket");
    }
    for (int i = 0; i < max_iter && hi - lo > tolerance; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// First sub-interval of a uniform `samples`-point scan of [lo, hi] on which f changes sign.
template <class F>
std::optional<std::pair<double, double>> first_sign_change(F &&f, double lo, double hi,
                                                           std::size_t samples = 1000) {
    if (samples < 2 || !(hi > lo)) {
        throw std::invalid_argument("first_sign_change: bad scan range");
    }
    double x_prev = lo;
    double f_prev = f(lo);
    for (std::size_t i = 1; i < samples; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double fx = f(x);
        if (f_prev == 0.0 || (f_prev < 0.0) != (fx < 0.0)) {
            return std::make_pair(x_prev, x);
        }
        x_prev = x;
        f_prev = fx;
    }
    return std::nullopt;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n < 2) {
        throw std::invalid_argument("linear_fit: need at least two (x, y) pairs");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) {
        throw std::invalid_argument("linear_fit: all x values are equal");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

} // namespace pdistill
