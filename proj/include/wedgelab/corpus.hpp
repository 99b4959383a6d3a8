#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wedgelab/background.hpp"
#include "wedgelab/field.hpp"
#include "wedgelab/jet.hpp"

namespace wedgelab {

// x^{2p} e^{-αx²} (1−ξ²)^q (1+βξ²): even in x and ξ, zero at ξ = ±1.
struct Profile {
    std::string name;
    int p = 0;
    double alpha = 1.0;
    int q = 2;
    double beta = 0.0;
    double scale = 1.0;

    template <class T>
    T operator()(T x, T xi) const {
        using std::exp;
        const T x2 = x * x;
        return scale * ipow(x2, p) * exp(-alpha * x2) * ipow(1.0 - xi * xi, q) * (1.0 + beta * xi * xi);
    }

    // Profiles with p >= 1 also vanish as x → 0, so they decay at both ends of the log strip.
    bool decays_at_origin() const { return p >= 1; }

    ScalarField sample(const GridPtr& g) const {
        return ScalarField::sample(g, [&](double x, double xi) { return (*this)(x, xi); }, Parity::even, Parity::even);
    }
};

inline const std::vector<Profile>& corpus() {
    static const std::vector<Profile> c = {
        {"gauss-q1", 0, 1.0, 1, 0.0},       {"gauss-q2", 0, 1.0, 2, 0.0},
        {"wide-q2-b05", 0, 0.5, 2, 0.5},    {"narrow-q1-b1", 0, 2.0, 1, 1.0},
        {"gauss-q3-bm05", 0, 1.0, 3, -0.5}, {"a15-q2-b2", 0, 1.5, 2, 2.0},
        {"x2-q1", 1, 1.0, 1, 0.0},          {"x2-q2", 1, 1.0, 2, 0.0},
        {"x2-wide-q2-b05", 1, 0.5, 2, 0.5}, {"x2-narrow-q2-b1", 1, 2.0, 2, 1.0},
        {"x2-q3-b03", 1, 1.0, 3, 0.3},      {"x4-q2", 2, 1.0, 2, 0.0},
    };
    return c;
}

inline std::vector<Profile> decaying_corpus() {
    std::vector<Profile> out;
    for (const auto& p : corpus())
        if (p.decays_at_origin()) out.push_back(p);
    return out;
}

inline const Profile& find_profile(const std::string& name) {
    for (const auto& p : corpus())
        if (p.name == name) return p;
    throw ConfigError("unknown corpus profile '" + name + "'");
}

} // namespace wedgelab
