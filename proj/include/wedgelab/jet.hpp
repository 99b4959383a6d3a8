#pragma once

#include <cmath>

namespace wedgelab {

// Hyper-dual number f + f1 e1 + f2 e2 + f12 e1e2 with e1² = e2² = 0.
// Seeding e1 and e2 along coordinate directions yields exact first and mixed second partials,
// which is how the manufactured profiles produce roundoff-level oracles.
struct Jet {
    double f = 0, d1 = 0, d2 = 0, d12 = 0;

    constexpr Jet() = default;
    constexpr Jet(double v) : f(v) {}  // NOLINT: implicit promotion of constants is intended
    constexpr Jet(double v, double a, double b, double ab) : f(v), d1(a), d2(b), d12(ab) {}

    // Chain rule for a scalar function with value g, slope g1 and curvature g2 at f.
    constexpr Jet lift(double g, double g1, double g2) const {
        return {g, g1 * d1, g1 * d2, g1 * d12 + g2 * d1 * d2};
    }
};

constexpr Jet operator+(Jet a, Jet b) { return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12}; }
constexpr Jet operator-(Jet a, Jet b) { return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12}; }
constexpr Jet operator-(Jet a) { return {-a.f, -a.d1, -a.d2, -a.d12}; }
constexpr Jet operator*(Jet a, Jet b) {
    return {a.f * b.f, a.d1 * b.f + a.f * b.d1, a.d2 * b.f + a.f * b.d2,
            a.d12 * b.f + a.d1 * b.d2 + a.d2 * b.d1 + a.f * b.d12};
}
constexpr Jet inverse(Jet a) { return a.lift(1 / a.f, -1 / (a.f * a.f), 2 / (a.f * a.f * a.f)); }
constexpr Jet operator/(Jet a, Jet b) { return a * inverse(b); }
constexpr Jet operator+(Jet a, double b) { return {a.f + b, a.d1, a.d2, a.d12}; }
constexpr Jet operator+(double a, Jet b) { return b + a; }
constexpr Jet operator-(Jet a, double b) { return {a.f - b, a.d1, a.d2, a.d12}; }
constexpr Jet operator-(double a, Jet b) { return -b + a; }
constexpr Jet operator*(Jet a, double b) { return {a.f * b, a.d1 * b, a.d2 * b, a.d12 * b}; }
constexpr Jet operator*(double a, Jet b) { return b * a; }
constexpr Jet operator/(Jet a, double b) { return a * (1 / b); }
constexpr Jet operator/(double a, Jet b) { return a * inverse(b); }

inline Jet exp(Jet a) {
    const double e = std::exp(a.f);
    return a.lift(e, e, e);
}
inline Jet sin(Jet a) { return a.lift(std::sin(a.f), std::cos(a.f), -std::sin(a.f)); }
inline Jet cos(Jet a) { return a.lift(std::cos(a.f), -std::sin(a.f), -std::cos(a.f)); }
inline Jet sqrt(Jet a) {
    const double s = std::sqrt(a.f);
    return a.lift(s, 0.5 / s, -0.25 / (s * a.f));
}
inline Jet pow(Jet a, int n) {
    if (n == 0) return Jet(1.0);
    const double p2 = std::pow(a.f, n - 2);
    return a.lift(p2 * a.f * a.f, n * p2 * a.f, n * (n - 1) * p2);
}

// Small nonnegative integer powers by repeated multiplication; works for double and Jet.
template <class T>
T ipow(T a, int n) {
    T r = T(1.0);
    for (int k = 0; k < n; ++k) r = r * a;
    return r;
}

inline double value(double a) { return a; }
inline double value(const Jet& a) { return a.f; }

// Partials of a two-argument callable: first, second and mixed derivatives at (x, y).
struct Partials2 {
    double f, fx, fy, fxx, fyy, fxy;
};

template <class F>
Partials2 partials(F&& fn, double x, double y) {
    const Jet a = fn(Jet(x, 1, 1, 0), Jet(y));
    const Jet b = fn(Jet(x), Jet(y, 1, 1, 0));
    const Jet c = fn(Jet(x, 1, 0, 0), Jet(y, 0, 1, 0));
    return {a.f, a.d1, b.d1, a.d12, b.d12, c.d12};
}

} // namespace wedgelab
