#pragma once

#include <array>

#include "dmrate/fock.hpp"
#include "dmrate/wigner.hpp"

namespace dmrate {

// Noisy heterodyne detector: efficiencies and electronic noises (shot-noise units) of the
// two homodyne arms measuring Re y and Im y.
struct DetectorModel {
    double eta1 = 1.0, eta2 = 1.0;
    double nu1 = 0.0, nu2 = 0.0;

    static DetectorModel symmetric(double eta, double nu) { return {eta, eta, nu, nu}; }
    static DetectorModel ideal() { return {1.0, 1.0, 0.0, 0.0}; }

    void validate() const;
    bool simple_case() const { return eta1 == eta2 && nu1 == nu2; }
    // (1 - eta_j + nu_j) / eta_j, the mean photon number of the effective thermal noise.
    double lambda(int arm) const;
    // Mean photon number nu_j / (2 (1 - eta_j)) of the ancillary thermal state; 0 for an ideal arm.
    double ancillary_nbar(int arm) const;

    bool operator==(const DetectorModel&) const = default;
};

// Below this effective noise the POVM is treated as the ideal coherent projector.
inline constexpr double kIdealNoiseThreshold = 1e-12;
// Below this |lambda1 - lambda2| the general POVM is evaluated with the symmetric formula.
inline constexpr double kSymmetricThreshold = 1e-12;

struct GeneralPovmParams {
    double lambda1, lambda2;
    double nbar_het;
    double xi_het;
    cplx alpha_het;

    static GeneralPovmParams from(const DetectorModel& det, cplx y);
};

// Wigner function of G_y as a scaled displaced squeezed thermal state.
WignerGaussian povm_wigner(const DetectorModel& det, cplx y);

// <m| D(a) rho_th(nbar) D(a)^dag |n>, or the coherent projector when nbar is negligible.
Matrix displaced_thermal_matrix(cplx a, double nbar, int N);

FockOperator povm_element_simple(cplx y, const DetectorModel& det, int N);
FockOperator povm_element_general(cplx y, const DetectorModel& det, int N);
// Dispatches to the symmetric closed form when available.
FockOperator povm_element(cplx y, const DetectorModel& det, int N);

// Tr(|n><m| G_y) from the phase-space overlap of Wigner functions. Validation only.
cplx povm_oracle_entry(int m, int n, cplx y, const DetectorModel& det);

struct NumericalPathOptions {
    // The general-detector path integrates whole operators numerically; above this cutoff it is
    // refused unless allow_large_cutoff is set.
    int slow_path_cap = 10;
    bool allow_large_cutoff = false;
    double slow_path_tol = 1e-9;
    double radial_tol = 1e-12;
};

struct RegionOperators {
    std::array<FockOperator, 4> R;
    double delta_a = 0.0;
    bool numerical_fallback = false;

    FockOperator sum() const;
};

RegionOperators region_operators(const DetectorModel& det, double delta_a, int N,
                                 const NumericalPathOptions& opts = {});

struct MomentObservables {
    FockOperator fq, fp, sq, sp;
    bool numerical_fallback = false;

    const FockOperator& operator[](int i) const;
};

MomentObservables moment_observables(const DetectorModel& det, int N, const NumericalPathOptions& opts = {});

struct ObservableSet {
    MomentObservables moments;
    RegionOperators regions;
};

ObservableSet observable_set(const DetectorModel& det, double delta_a, int N,
                             const NumericalPathOptions& opts = {});

}  // namespace dmrate
