#pragma once

#include <cmath>
#include <string>

#include "wedgelab/field.hpp"
#include "wedgelab/parallel.hpp"

namespace wedgelab {

namespace detail {

inline void require_nodes(const ScalarField& f, const char* what) {
    const auto& g = f.grid();
    if (g.nx() < 5 || g.nxi() < 5) throw GridError(std::string(what) + ": grid needs at least 5 nodes per axis");
    f.require_finite(what);
}

// Derivative along the stored x axis (y in log mode).
inline ScalarField along_x(const ScalarField& f, int order) {
    const auto& g = f.grid();
    const auto& st = order == 1 ? g.x_axis().d1 : g.x_axis().d2;
    ScalarField out(f.grid_ptr());
    parallel_for(g.nx(), [&](std::size_t i) {
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            out(i, j) = st[i].apply([&](std::size_t k) { return f(k, j); });
        }
    });
    return out;
}

inline ScalarField along_xi(const ScalarField& f, int order) {
    const auto& g = f.grid();
    const auto& st = order == 1 ? g.xi_axis().d1 : g.xi_axis().d2;
    ScalarField out(f.grid_ptr());
    parallel_for(g.nx(), [&](std::size_t i) {
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            out(i, j) = st[j].apply([&](std::size_t k) { return f(i, k); });
        }
    });
    return out;
}

} // namespace detail

// Physical ∂_x or ∂_x². In log mode ∂_x = x⁻¹∂_y and ∂_x² = x⁻²(∂_y² − ∂_y).
inline ScalarField diff_x(const ScalarField& f, int order = 1) {
    if (order != 1 && order != 2) throw ConfigError("diff_x order must be 1 or 2");
    detail::require_nodes(f, "diff_x");
    const auto& g = f.grid();
    ScalarField out = detail::along_x(f, order);
    if (g.mode() == GridMode::log_x) {
        if (order == 1) {
            for (std::size_t i = 0; i < g.nx(); ++i)
                for (std::size_t j = 0; j < g.nxi(); ++j) out(i, j) /= g.x(i);
        } else {
            const ScalarField dy = detail::along_x(f, 1);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const double x2 = g.x(i) * g.x(i);
                for (std::size_t j = 0; j < g.nxi(); ++j) out(i, j) = (out(i, j) - dy(i, j)) / x2;
            }
        }
    }
    out.set_parity(order == 1 ? parity_flip(f.parity_x()) : f.parity_x(), f.parity_xi());
    return out;
}

inline ScalarField diff_xi(const ScalarField& f, int order = 1) {
    if (order != 1 && order != 2) throw ConfigError("diff_xi order must be 1 or 2");
    detail::require_nodes(f, "diff_xi");
    ScalarField out = detail::along_xi(f, order);
    out.set_parity(f.parity_x(), order == 1 ? parity_flip(f.parity_xi()) : f.parity_xi());
    return out;
}

inline ScalarField diff_x_xi(const ScalarField& f) { return diff_xi(diff_x(f, 1), 1); }

// Z_x = x∂_x; exactly ∂_y in log mode.
inline ScalarField adapted_Zx(const ScalarField& f) {
    detail::require_nodes(f, "adapted_Zx");
    const auto& g = f.grid();
    ScalarField out = detail::along_x(f, 1);
    if (g.mode() != GridMode::log_x) {
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.nxi(); ++j) out(i, j) *= g.x(i);
    }
    out.set_parity(f.parity_x(), f.parity_xi());
    return out;
}

// D_ξ = ξ⁻¹∂_ξ. Refuses odd or undeclared ξ-parity when a node sits within eps of ξ = 0.
inline ScalarField adapted_Dxi(const ScalarField& f, double eps = 1e-6) {
    detail::require_nodes(f, "adapted_Dxi");
    const auto& g = f.grid();
    if (f.parity_xi() != Parity::even) {
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            if (std::abs(g.xi(j)) < eps) {
                throw ParityError("adapted_Dxi: field is not declared even in xi and node xi=" +
                                  format_double(g.xi(j)) + " lies within " + format_double(eps) + " of 0");
            }
        }
    }
    ScalarField out = detail::along_xi(f, 1);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.nxi(); ++j) out(i, j) /= g.xi(j);
    out.set_parity(f.parity_x(), f.parity_xi());
    return out;
}

// Z_x^j D_ξ^l f.
inline ScalarField adapted_power(ScalarField f, int j, int l) {
    for (int a = 0; a < l; ++a) f = adapted_Dxi(f);
    for (int a = 0; a < j; ++a) f = adapted_Zx(f);
    return f;
}

// ξ∂_ξ, the combination that appears throughout the polar equations.
inline ScalarField xi_dxi(const ScalarField& f) {
    const auto& g = f.grid();
    ScalarField out = diff_xi(f, 1);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.nxi(); ++j) out(i, j) *= g.xi(j);
    out.set_parity(f.parity_x(), f.parity_xi());
    return out;
}

// Coefficient field c(ξ), even in x; parity in ξ declared by the caller.
template <class F>
ScalarField xi_coefficient(const GridPtr& grid, F&& c, Parity pxi = Parity::even) {
    return ScalarField::sample(grid, [&](double, double xi) { return c(xi); }, Parity::even, pxi);
}

} // namespace wedgelab
