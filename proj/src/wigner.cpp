#include "dmrate/wigner.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dmrate/quadrature.hpp"
#include "dmrate/special.hpp"

namespace dmrate {

using std::numbers::pi;

double WignerGaussian::operator()(cplx g) const {
    const double dq = g.real() - center.real();
    const double dp = g.imag() - center.imag();
    return prefactor * std::exp(-dq * dq / var_q - dp * dp / var_p);
}

double WignerGaussian::plane_integral() const { return prefactor * pi * std::sqrt(var_q * var_p); }

// var is 2 sigma^2 in this parametrization.
double WignerGaussian::sigma_max() const { return std::sqrt(0.5 * std::max(var_q, var_p)); }

WignerGaussian wigner_state(StateKind kind, const GaussianStateParams& params) {
    if (params.nbar < 0.0) throw std::invalid_argument("wigner_state: negative mean photon number");
    const double width = 1.0 + 2.0 * params.nbar;
    WignerGaussian w;
    w.prefactor = (2.0 / pi) / width;
    double sq = 0.0;
    switch (kind) {
        case StateKind::vacuum:
            w.prefactor = 2.0 / pi;
            w.var_q = w.var_p = 0.5;
            return w;
        case StateKind::thermal:
            break;
        case StateKind::displaced_thermal:
            w.center = params.displacement;
            break;
        case StateKind::squeezed_thermal:
            sq = params.squeezing;
            break;
        case StateKind::displaced_squeezed_thermal:
            w.center = params.displacement;
            sq = params.squeezing;
            break;
    }
    w.var_q = width * std::exp(-2.0 * sq) / 2.0;
    w.var_p = width * std::exp(2.0 * sq) / 2.0;
    return w;
}

cplx fock_transition_wigner(int m, int n, cplx g) {
    if (m < n) return std::conj(fock_transition_wigner(n, m, g));
    const double r2 = std::norm(g);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double ratio = std::exp(0.5 * (log_factorial(n) - log_factorial(m)));
    const cplx power = std::pow(2.0 * std::conj(g), m - n);
    return (2.0 / pi) * sign * ratio * power * std::exp(-2.0 * r2) * laguerre(n, m - n, 4.0 * r2);
}

IntegrationBox IntegrationBox::around(cplx center, double sigma_max) {
    return {center, std::max(6.0, std::abs(center) + 6.0 * sigma_max)};
}

double overlap_integral(const std::function<double(cplx)>& wf, const std::function<double(cplx)>& wg,
                        const IntegrationBox& box, double abs_tol) {
    const double x0 = box.center.real(), y0 = box.center.imag(), r = box.radius;
    auto f = [&](double x, double y) {
        const cplx g(x, y);
        return wf(g) * wg(g);
    };
    return pi * quad::integrate_2d(f, x0 - r, x0 + r, y0 - r, y0 + r, abs_tol / pi, 8).value;
}

cplx overlap_integral_complex(const std::function<cplx(cplx)>& wf, const std::function<double(cplx)>& wg,
                              const IntegrationBox& box, double abs_tol) {
    const double x0 = box.center.real(), y0 = box.center.imag(), r = box.radius;
    auto f = [&](double x, double y) {
        const cplx g(x, y);
        return wf(g) * wg(g);
    };
    return pi * quad::integrate_2d(f, x0 - r, x0 + r, y0 - r, y0 + r, abs_tol / pi, 8).value;
}

}  // namespace dmrate
