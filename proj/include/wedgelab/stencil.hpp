#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wedgelab {

// Fornberg's recursion for finite-difference weights on arbitrary nodes.
// Returns weights[node][order] for derivative orders 0..max_order evaluated at z.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                         int max_order) {
    const std::size_t n = nodes.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(max_order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    return c;
}

// A compact stencil: `size` consecutive nodes starting at `first`.
struct Stencil {
    std::size_t first = 0;
    std::size_t size = 0;
    std::array<double, 4> w{};

    template <class Get>
    double apply(Get&& value_at) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < size; ++k) acc += w[k] * value_at(first + k);
        return acc;
    }
};

// Second-order stencils for d/ds and d²/ds² on a strictly increasing node set.
// Interior nodes with equal neighbour spacing use the 3-point centred rules; nodes next to an
// uneven spacing (the half-cell at a cell-centred boundary) get a 4-point rule for d²;
// end nodes get one-sided 3-point (d) and 4-point (d²) rules.
inline std::pair<std::vector<Stencil>, std::vector<Stencil>> build_axis_stencils(
    std::span<const double> s) {
    const std::size_t n = s.size();
    std::vector<Stencil> d1(n), d2(n);
    auto make = [&](std::size_t first, std::size_t size, std::size_t at, int order) {
        Stencil st;
        st.first = first;
        st.size = size;
        auto w = fornberg_weights(s[at], s.subspan(first, size), order);
        for (std::size_t k = 0; k < size; ++k) st.w[k] = w[k][order];
        return st;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            d1[i] = make(0, 3, i, 1);
            d2[i] = make(0, 4, i, 2);
        } else if (i == n - 1) {
            d1[i] = make(n - 3, 3, i, 1);
            d2[i] = make(n - 4, 4, i, 2);
        } else {
            d1[i] = make(i - 1, 3, i, 1);
            const double hl = s[i] - s[i - 1];
            const double hr = s[i + 1] - s[i];
            const bool even = std::abs(hl - hr) <= 1e-12 * std::max(hl, hr);
            if (even) {
                d2[i] = make(i - 1, 3, i, 2);
            } else if (hl < hr) {
                d2[i] = make(i - 1, 4, i, 2);  // short step on the left: extend right
            } else {
                d2[i] = make(i - 2, 4, i, 2);
            }
        }
    }
    return {std::move(d1), std::move(d2)};
}

} // namespace wedgelab
