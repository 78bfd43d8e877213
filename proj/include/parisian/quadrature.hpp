#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "parisian/errors.hpp"

namespace parisian::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 abscissae).
inline constexpr double kronrod_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kronrod_w[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gauss_w[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kronrod_w[7];
    double gauss = fc * gauss_w[3];
    double abs_sum = std::abs(kronrod);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_x[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += kronrod_w[j] * (f1 + f2);
        abs_sum += kronrod_w[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += gauss_w[j / 2] * (f1 + f2);
    }
    const double mean = 0.5 * kronrod;
    double asc = kronrod_w[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        asc += kronrod_w[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

    const double scale = std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    asc *= scale;
    abs_sum *= scale;
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * abs_sum);
    return {a, b, kronrod * half, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on [a, b]: the panel with the largest error estimate is
// bisected until the summed estimate drops below max(abs_tol, rel_tol*|I|).
// Throws numerics_error if max_panels is reached first.
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol, double rel_tol,
                 int max_panels = 4000) {
    if (a == b) return {};
    std::priority_queue<detail::Panel> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    int panels = 1;
    double frozen_sum = 0.0, frozen_err = 0.0;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (panels >= max_panels)
            throw numerics_error("adaptive quadrature did not converge on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]");
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Panel cannot be split in floating point; accept it as is.
            frozen_sum += worst.value;
            frozen_err += worst.error;
            total_err -= worst.error;
            if (heap.empty()) break;
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    // Recompute the sum from the panels to shed accumulated cancellation.
    double sum = frozen_sum, err = frozen_err;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {sum, std::max(err, 0.0), panels};
}

// Integrates over consecutive intervals between sorted breakpoints (kinks, atoms,
// support boundaries). Each piece receives the full tolerance.
template <class F>
Result integrate_pieces(const F& f, std::span<const double> points, double abs_tol,
                        double rel_tol, int max_panels = 4000) {
    Result out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        auto piece = integrate(f, points[i], points[i + 1], abs_tol, rel_tol, max_panels);
        out.value += piece.value;
        out.error += piece.error;
        out.panels += piece.panels;
    }
    return out;
}

}  // namespace parisian::quad
