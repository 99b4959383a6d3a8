#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "wedgelab/error.hpp"
#include "wedgelab/stencil.hpp"

namespace wedgelab {

enum class GridMode { linear_x, log_x, box };

inline const char* to_string(GridMode m) {
    switch (m) {
    case GridMode::linear_x: return "linear-x";
    case GridMode::log_x: return "log-x";
    case GridMode::box: return "box";
    }
    return "?";
}

// One coordinate direction with precomputed derivative stencils.
struct Axis {
    std::vector<double> s;
    std::vector<Stencil> d1, d2;
    double h = 0.0;  // nominal (interior) spacing

    Axis() = default;
    Axis(std::vector<double> nodes, double spacing) : s(std::move(nodes)), h(spacing) {
        auto [a, b] = build_axis_stencils(s);
        d1 = std::move(a);
        d2 = std::move(b);
    }
    std::size_t size() const { return s.size(); }
};

// Cell-centred ξ nodes: boundary -1, cell centres -1+(k-1/2)h for k=1..N, boundary +1.
inline std::vector<double> cell_centered_xi(std::size_t cells) {
    if (cells < 4 || cells % 2 != 0) {
        throw GridError("xi axis needs an even number of cells >= 4, got " + std::to_string(cells));
    }
    const double h = 2.0 / static_cast<double>(cells);
    std::vector<double> xi;
    xi.reserve(cells + 2);
    xi.push_back(-1.0);
    for (std::size_t k = 0; k < cells; ++k) xi.push_back(-1.0 + (static_cast<double>(k) + 0.5) * h);
    xi.push_back(1.0);
    return xi;
}

inline std::vector<double> uniform_nodes(double a, double b, std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 2 && n % 2 == 1 && std::abs(a + b) < 1e-14 * std::abs(b - a)) s[n / 2] = 0.0;
    return s;
}

// Tensor-product grid over (x or y=log x) × ξ. Values are stored x-major: index = i*nxi + j.
class WedgeGrid {
public:
    using Ptr = std::shared_ptr<const WedgeGrid>;

    // Uniform x on [x_min, x_max]; symmetric about 0 when x_min = -x_max.
    static Ptr linear(double x_min, double x_max, std::size_t nx, std::size_t xi_cells) {
        if (nx < 5) throw GridError("x axis needs at least 5 nodes");
        if (!(x_max > x_min)) throw GridError("x range must be increasing");
        auto g = std::shared_ptr<WedgeGrid>(new WedgeGrid);
        g->mode_ = GridMode::linear_x;
        g->ax_ = Axis(uniform_nodes(x_min, x_max, nx), (x_max - x_min) / static_cast<double>(nx - 1));
        g->axi_ = Axis(cell_centered_xi(xi_cells), 2.0 / static_cast<double>(xi_cells));
        g->phys_x_ = g->ax_.s;
        g->x_symmetric_ = std::abs(x_min + x_max) <= 1e-14 * (x_max - x_min);
        return g;
    }

    static Ptr symmetric(double x_max, std::size_t nx, std::size_t xi_cells) {
        if (nx % 2 == 0) throw GridError("symmetric x grid needs an odd node count so x=0 is a node");
        return linear(-x_max, x_max, nx, xi_cells);
    }

    // Log strip: axis stores y = log x, uniform on [y_min, y_max].
    static Ptr log_strip(double y_min, double y_max, std::size_t ny, std::size_t xi_cells) {
        if (ny < 5) throw GridError("y axis needs at least 5 nodes");
        if (!(y_max > y_min)) throw GridError("y range must be increasing");
        auto g = std::shared_ptr<WedgeGrid>(new WedgeGrid);
        g->mode_ = GridMode::log_x;
        g->ax_ = Axis(uniform_nodes(y_min, y_max, ny), (y_max - y_min) / static_cast<double>(ny - 1));
        g->axi_ = Axis(cell_centered_xi(xi_cells), 2.0 / static_cast<double>(xi_cells));
        g->phys_x_.resize(ny);
        for (std::size_t i = 0; i < ny; ++i) g->phys_x_[i] = std::exp(g->ax_.s[i]);
        return g;
    }

    // Plain uniform rectangle in Cartesian (ρ, z); used for the velocity-pressure checks.
    static Ptr box(double r0, double r1, std::size_t nr, double z0, double z1, std::size_t nz) {
        if (nr < 5 || nz < 5) throw GridError("box grid needs at least 5 nodes per axis");
        auto g = std::shared_ptr<WedgeGrid>(new WedgeGrid);
        g->mode_ = GridMode::box;
        g->ax_ = Axis(uniform_nodes(r0, r1, nr), (r1 - r0) / static_cast<double>(nr - 1));
        g->axi_ = Axis(uniform_nodes(z0, z1, nz), (z1 - z0) / static_cast<double>(nz - 1));
        g->phys_x_ = g->ax_.s;
        return g;
    }

    GridMode mode() const { return mode_; }
    const Axis& x_axis() const { return ax_; }
    const Axis& xi_axis() const { return axi_; }
    std::size_t nx() const { return ax_.size(); }
    std::size_t nxi() const { return axi_.size(); }
    std::size_t size() const { return nx() * nxi(); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * nxi() + j; }

    double x(std::size_t i) const { return phys_x_[i]; }  // physical x (e^y in log mode)
    double s(std::size_t i) const { return ax_.s[i]; }    // computational coordinate
    double xi(std::size_t j) const { return axi_.s[j]; }
    const std::vector<double>& x_coords() const { return phys_x_; }
    const std::vector<double>& xi_coords() const { return axi_.s; }
    double h_x() const { return ax_.h; }
    double h_xi() const { return axi_.h; }
    bool x_symmetric() const { return x_symmetric_; }
    bool xi_symmetric() const { return mode_ != GridMode::box; }
    bool is_xi_boundary(std::size_t j) const { return j == 0 || j + 1 == nxi(); }
    bool is_x_boundary(std::size_t i) const { return i == 0 || i + 1 == nx(); }

    std::string describe() const {
        return std::string(to_string(mode_)) + " " + std::to_string(nx()) + "x" + std::to_string(nxi());
    }

private:
    WedgeGrid() = default;
    GridMode mode_ = GridMode::linear_x;
    Axis ax_, axi_;
    std::vector<double> phys_x_;
    bool x_symmetric_ = false;
};

using GridPtr = WedgeGrid::Ptr;

} // namespace wedgelab
