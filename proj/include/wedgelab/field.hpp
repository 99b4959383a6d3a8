#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wedgelab/error.hpp"
#include "wedgelab/grid.hpp"

namespace wedgelab {

enum class Parity { even, odd, none };

inline const char* to_string(Parity p) {
    switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::none: return "none";
    }
    return "?";
}

inline Parity parity_sum(Parity a, Parity b) { return a == b ? a : Parity::none; }

inline Parity parity_product(Parity a, Parity b) {
    if (a == Parity::none || b == Parity::none) return Parity::none;
    return a == b ? Parity::even : Parity::odd;
}

inline Parity parity_flip(Parity p) {
    if (p == Parity::none) return p;
    return p == Parity::even ? Parity::odd : Parity::even;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Grid-sampled real scalar with declared parities in x and ξ.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, Parity px = Parity::none, Parity pxi = Parity::none)
        : grid_(std::move(grid)), v_(grid_->size(), 0.0), px_(px), pxi_(pxi) {}

    // f receives the physical x and ξ of each node.
    template <class F>
    static ScalarField sample(GridPtr grid, F&& f, Parity px = Parity::none, Parity pxi = Parity::none) {
        ScalarField out(grid, px, pxi);
        for (std::size_t i = 0; i < grid->nx(); ++i) {
            for (std::size_t j = 0; j < grid->nxi(); ++j) out(i, j) = f(grid->x(i), grid->xi(j));
        }
        return out;
    }

    static ScalarField constant(GridPtr grid, double c) {
        ScalarField out(grid, Parity::even, Parity::even);
        std::fill(out.v_.begin(), out.v_.end(), c);
        return out;
    }

    const WedgeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double& operator()(std::size_t i, std::size_t j) { return v_[grid_->index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[grid_->index(i, j)]; }
    double& operator[](std::size_t k) { return v_[k]; }
    double operator[](std::size_t k) const { return v_[k]; }
    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }

    Parity parity_x() const { return px_; }
    Parity parity_xi() const { return pxi_; }
    ScalarField& set_parity(Parity px, Parity pxi) {
        px_ = px;
        pxi_ = pxi;
        return *this;
    }
    bool blown_up() const { return blown_up_; }
    void mark_blown_up() { blown_up_ = true; }

    bool all_finite() const {
        return std::all_of(v_.begin(), v_.end(), [](double a) { return std::isfinite(a); });
    }
    void require_finite(const char* where) const {
        if (!blown_up_ && !all_finite()) throw NonFiniteError(std::string(where) + ": non-finite input field");
    }

    double max_abs() const {
        double m = 0.0;
        for (double a : v_) m = std::max(m, std::abs(a));
        return m;
    }

    // Max |f| over nodes at least `margin` nodes away from every edge of the grid.
    double max_abs_interior(std::size_t margin = 1) const {
        double m = 0.0;
        const auto& g = *grid_;
        for (std::size_t i = margin; i + margin < g.nx(); ++i) {
            for (std::size_t j = margin; j + margin < g.nxi(); ++j) m = std::max(m, std::abs((*this)(i, j)));
        }
        return m;
    }

    // Largest deviation from the declared parities (mirror nodes on symmetric axes).
    double parity_defect() const {
        const auto& g = *grid_;
        double d = 0.0;
        const bool check_x = px_ != Parity::none && g.x_symmetric();
        const bool check_xi = pxi_ != Parity::none && g.xi_symmetric();
        const double sx = px_ == Parity::odd ? -1.0 : 1.0;
        const double sxi = pxi_ == Parity::odd ? -1.0 : 1.0;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            for (std::size_t j = 0; j < g.nxi(); ++j) {
                const double f = (*this)(i, j);
                if (check_x) d = std::max(d, std::abs(f - sx * (*this)(g.nx() - 1 - i, j)));
                if (check_xi) d = std::max(d, std::abs(f - sxi * (*this)(i, g.nxi() - 1 - j)));
            }
        }
        return d;
    }

    // Replace values by their parity projection; used to remove roundoff asymmetry.
    void symmetrize() {
        const auto& g = *grid_;
        if (pxi_ != Parity::none && g.xi_symmetric()) {
            const double s = pxi_ == Parity::odd ? -1.0 : 1.0;
            for (std::size_t i = 0; i < g.nx(); ++i) {
                for (std::size_t j = 0; j < g.nxi() / 2; ++j) {
                    const std::size_t k = g.nxi() - 1 - j;
                    const double a = 0.5 * ((*this)(i, j) + s * (*this)(i, k));
                    (*this)(i, j) = a;
                    (*this)(i, k) = s * a;
                }
            }
        }
        if (px_ != Parity::none && g.x_symmetric()) {
            const double s = px_ == Parity::odd ? -1.0 : 1.0;
            for (std::size_t i = 0; i < g.nx() / 2; ++i) {
                const std::size_t k = g.nx() - 1 - i;
                for (std::size_t j = 0; j < g.nxi(); ++j) {
                    const double a = 0.5 * ((*this)(i, j) + s * (*this)(k, j));
                    (*this)(i, j) = a;
                    (*this)(k, j) = s * a;
                }
            }
        }
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write " + path);
        write_csv(os);
    }
    void write_csv(std::ostream& os) const {
        const auto& g = *grid_;
        os << "x,xi,value\n";
        for (std::size_t i = 0; i < g.nx(); ++i) {
            for (std::size_t j = 0; j < g.nxi(); ++j) {
                os << format_double(g.x(i)) << ',' << format_double(g.xi(j)) << ','
                   << format_double((*this)(i, j)) << '\n';
            }
        }
    }

    // Elementwise combination with parity bookkeeping left to the caller.
    template <class Op>
    ScalarField zip(const ScalarField& o, Op op, Parity px, Parity pxi) const {
        check_same_grid(o);
        ScalarField out(grid_, px, pxi);
        for (std::size_t k = 0; k < v_.size(); ++k) out.v_[k] = op(v_[k], o.v_[k]);
        return out;
    }
    template <class Op>
    ScalarField map(Op op) const {
        ScalarField out(grid_, px_, pxi_);
        for (std::size_t k = 0; k < v_.size(); ++k) out.v_[k] = op(v_[k]);
        return out;
    }

    void check_same_grid(const ScalarField& o) const {
        if (grid_ != o.grid_) throw GridError("fields live on different grids");
    }

    ScalarField& operator+=(const ScalarField& o) {
        check_same_grid(o);
        for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
        px_ = parity_sum(px_, o.px_);
        pxi_ = parity_sum(pxi_, o.pxi_);
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        check_same_grid(o);
        for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
        px_ = parity_sum(px_, o.px_);
        pxi_ = parity_sum(pxi_, o.pxi_);
        return *this;
    }
    ScalarField& operator*=(double c) {
        for (double& a : v_) a *= c;
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator-(ScalarField a) { return a *= -1.0; }
    friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
    friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
        return a.zip(b, std::multiplies<>{}, parity_product(a.px_, b.px_), parity_product(a.pxi_, b.pxi_));
    }
    friend ScalarField operator+(ScalarField a, double c) {
        for (double& x : a.v_) x += c;
        if (c != 0.0) {
            if (a.px_ == Parity::odd) a.px_ = Parity::none;
            if (a.pxi_ == Parity::odd) a.pxi_ = Parity::none;
        }
        return a;
    }

private:
    GridPtr grid_;
    std::vector<double> v_;
    Parity px_ = Parity::none;
    Parity pxi_ = Parity::none;
    bool blown_up_ = false;
};

} // namespace wedgelab
