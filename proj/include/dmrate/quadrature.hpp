#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "dmrate/errors.hpp"

namespace dmrate::quad {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

template <class V>
struct Result {
    V value;
    double error;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
auto kronrod_panel(F& f, double a, double b) {
    using V = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V fc = f(c);
    V k = fc * kWk[7];
    V g = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        V f1 = f(c - h * kXk[i]);
        V f2 = f(c + h * kXk[i]);
        V s = f1 + f2;
        k = k + s * kWk[i];
        if (i % 2 == 1) g = g + s * kWg[i / 2];
    }
    V kv = k * h;
    V gv = g * h;
    V diff = kv - gv;
    return Result<V>{kv, magnitude(diff)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of a scalar, complex or Eigen-matrix valued
// function. The panel with the largest error estimate is bisected until the summed estimate
// falls below abs_tol.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol, int initial_panels = 4, int max_panels = 4000) {
    using V = std::decay_t<decltype(f(a))>;
    struct Panel {
        double a, b;
        V value;
        double error;
    };
    std::vector<Panel> panels;
    const double w = (b - a) / initial_panels;
    for (int i = 0; i < initial_panels; ++i) {
        const double pa = a + i * w, pb = (i + 1 == initial_panels) ? b : a + (i + 1) * w;
        auto r = detail::kronrod_panel(f, pa, pb);
        panels.push_back({pa, pb, r.value, r.error});
    }
    auto total_error = [&] {
        double e = 0.0;
        for (const auto& p : panels) e += p.error;
        return e;
    };
    double err = total_error();
    while (err > abs_tol) {
        if (static_cast<int>(panels.size()) >= max_panels)
            throw NumericalFailure("adaptive quadrature did not converge", err);
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& x, const Panel& y) { return x.error < y.error; });
        const double pa = worst->a, pb = worst->b, mid = 0.5 * (pa + pb);
        if (!(mid > pa && mid < pb)) throw NumericalFailure("adaptive quadrature panel underflow", err);
        auto left = detail::kronrod_panel(f, pa, mid);
        auto right = detail::kronrod_panel(f, mid, pb);
        *worst = {pa, mid, left.value, left.error};
        panels.push_back({mid, pb, right.value, right.error});
        err = total_error();
    }
    V sum = panels.front().value;
    for (std::size_t i = 1; i < panels.size(); ++i) sum = sum + panels[i].value;
    return Result<V>{sum, err};
}

// Nested adaptive integration of f(x, y) over a rectangle.
template <class F>
auto integrate_2d(F&& f, double x0, double x1, double y0, double y1, double abs_tol, int initial_panels = 4) {
    const double inner_tol = 0.5 * abs_tol / std::max(1e-300, x1 - x0);
    auto outer = [&](double x) {
        auto inner = [&](double y) { return f(x, y); };
        return integrate(inner, y0, y1, inner_tol, initial_panels).value;
    };
    return integrate(outer, x0, x1, 0.5 * abs_tol, initial_panels);
}

}  // namespace dmrate::quad
