#pragma once

#include <complex>
#include <functional>

#include "dmrate/fock.hpp"

namespace dmrate {

// W(g) = prefactor * exp(-(Re g - Re c)^2 / var_q - (Im g - Im c)^2 / var_p).
// Its integral over the plane is prefactor * pi * sqrt(var_q * var_p).
struct WignerGaussian {
    cplx center{0.0, 0.0};
    double var_q = 0.5;
    double var_p = 0.5;
    double prefactor = 2.0 / 3.141592653589793238462643383279502884;

    double operator()(cplx g) const;
    double plane_integral() const;
    double sigma_max() const;
};

enum class StateKind { vacuum, thermal, displaced_thermal, squeezed_thermal, displaced_squeezed_thermal };

struct GaussianStateParams {
    cplx displacement{0.0, 0.0};
    double squeezing = 0.0;
    double nbar = 0.0;
};

WignerGaussian wigner_state(StateKind kind, const GaussianStateParams& params = {});

// Wigner function of the Fock transition operator |m><n|.
cplx fock_transition_wigner(int m, int n, cplx g);

// Square domain [center - radius, center + radius]^2 used by the overlap integrals.
struct IntegrationBox {
    cplx center{0.0, 0.0};
    double radius = 6.0;
    static IntegrationBox around(cplx center, double sigma_max);
};

inline constexpr double kOverlapTolerance = 1e-10;

// pi * integral of W_F * W_G over the box; equals Tr(F G).
double overlap_integral(const std::function<double(cplx)>& wf, const std::function<double(cplx)>& wg,
                        const IntegrationBox& box, double abs_tol = kOverlapTolerance);
cplx overlap_integral_complex(const std::function<cplx(cplx)>& wf, const std::function<double(cplx)>& wg,
                              const IntegrationBox& box, double abs_tol = kOverlapTolerance);

}  // namespace dmrate
