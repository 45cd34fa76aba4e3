#pragma once

#include <array>
#include <optional>

#include "dmrate/detector.hpp"
#include "dmrate/fock.hpp"

namespace dmrate {

// Phase-invariant Gaussian channel: transmittance and excess noise referred to the channel input.
struct ChannelModel {
    double eta_t = 1.0;
    double xi = 0.0;
    std::optional<double> distance_km;

    // 0.2 dB/km fibre loss.
    static ChannelModel from_distance(double km, double xi);
    static ChannelModel from_transmittance(double eta_t, double xi);
    void validate() const;
};

struct ProtocolParams {
    double alpha = 0.75;
    double delta_a = 0.0;
    double beta = 0.95;
    int cutoff = 12;

    static constexpr std::array<double, 4> priors{0.25, 0.25, 0.25, 0.25};
    // alpha * i^x.
    cplx signal(int x) const;
    void validate() const;
};

// Index order of the four moment observables and their expectation values.
enum MomentIndex { kFQ = 0, kFP = 1, kSQ = 2, kSP = 3 };
// Index order of the ideal-detector observables q, p, n, d.
enum IdealIndex { kQ = 0, kP = 1, kN = 2, kD = 3 };

using MomentTable = std::array<std::array<double, 4>, 4>;  // [signal x][observable]

struct SimulatedStatistics {
    MomentTable moments{};
};

SimulatedStatistics simulate_statistics(const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp,
                                        const NumericalPathOptions& opts = {});

// Expectations of q, p, n, d implied by the moment statistics when the detector noise is attributed
// to the channel.
MomentTable untrusted_expectations(const SimulatedStatistics& stats);

// State arriving at the detector for signal x, truncated at N.
Matrix received_state(const ChannelModel& ch, const ProtocolParams& pp, int x, int N);

// Outcome density P(y | x).
double pdf_outcome(cplx y, int x, const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp);

struct DiscretizedDistribution {
    std::array<std::array<double, 4>, 4> joint{};  // P(x, z), postselected, not renormalized
    double p_pass = 0.0;

    // P(z | x) before renormalization.
    double conditional(int x, int z) const { return joint[x][z] / ProtocolParams::priors[x]; }
};

DiscretizedDistribution discretization_distribution(const ChannelModel& ch, const DetectorModel& det,
                                                    const ProtocolParams& pp);

struct EcCost {
    double delta_ec;
    double p_pass;
    double h_z;
    double i_xz;
};

EcCost ec_cost(const DiscretizedDistribution& dd, double beta);

// xi + nu / (eta_d eta_t).
double effective_excess_noise(const ChannelModel& ch, const DetectorModel& det);

}  // namespace dmrate
