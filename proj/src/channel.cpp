#include "dmrate/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dmrate/quadrature.hpp"

namespace dmrate {

using std::numbers::pi;

ChannelModel ChannelModel::from_distance(double km, double xi) {
    if (!(km >= 0.0)) throw std::invalid_argument("distance must be nonnegative");
    ChannelModel ch{std::pow(10.0, -0.02 * km), xi, km};
    ch.validate();
    return ch;
}

ChannelModel ChannelModel::from_transmittance(double eta_t, double xi) {
    ChannelModel ch{eta_t, xi, std::nullopt};
    ch.validate();
    return ch;
}

void ChannelModel::validate() const {
    if (!(eta_t > 0.0 && eta_t <= 1.0)) throw std::invalid_argument("transmittance must lie in (0, 1]");
    if (!(xi >= 0.0)) throw std::invalid_argument("excess noise must be nonnegative");
}

cplx ProtocolParams::signal(int x) const {
    static const std::array<cplx, 4> phases{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    return alpha * phases.at(x);
}

void ProtocolParams::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("amplitude must be positive");
    if (!(delta_a >= 0.0)) throw std::invalid_argument("postselection radius must be nonnegative");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("reconciliation efficiency must lie in (0, 1]");
    if (cutoff < 2) throw std::invalid_argument("photon-number cutoff must be at least 2");
}

Matrix received_state(const ChannelModel& ch, const ProtocolParams& pp, int x, int N) {
    return displaced_thermal_matrix(std::sqrt(ch.eta_t) * pp.signal(x), ch.eta_t * ch.xi / 2.0, N);
}

SimulatedStatistics simulate_statistics(const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp,
                                        const NumericalPathOptions& opts) {
    ch.validate();
    det.validate();
    pp.validate();
    SimulatedStatistics out;
    if (det.simple_case()) {
        const double eta = det.eta1 * ch.eta_t;
        const double noise = 1.0 + eta * ch.xi / 2.0 + det.nu1;
        for (int x = 0; x < 4; ++x) {
            const cplx a = pp.signal(x);
            out.moments[x] = {std::sqrt(2.0 * eta) * a.real(), std::sqrt(2.0 * eta) * a.imag(),
                              2.0 * eta * a.real() * a.real() + noise, 2.0 * eta * a.imag() * a.imag() + noise};
        }
        return out;
    }
    const auto obs = moment_observables(det, pp.cutoff, opts);
    for (int x = 0; x < 4; ++x) {
        const Matrix sigma = received_state(ch, pp, x, pp.cutoff);
        for (int k = 0; k < 4; ++k) out.moments[x][k] = (sigma * obs[k].matrix()).trace().real();
    }
    return out;
}

MomentTable untrusted_expectations(const SimulatedStatistics& stats) {
    MomentTable out{};
    for (int x = 0; x < 4; ++x) {
        const auto& m = stats.moments[x];
        out[x] = {m[kFQ], m[kFP], (m[kSQ] + m[kSP]) / 2.0 - 1.0, m[kSQ] - m[kSP]};
    }
    return out;
}

namespace {

// Per-arm variance parameters v_j (density exp(-(Re y - mu)^2 / v1 - ...)) and means.
struct OutcomeGaussian {
    cplx mean;
    double v1, v2;
};

OutcomeGaussian outcome_gaussian(int x, const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp) {
    const cplx a = pp.signal(x);
    return {cplx(std::sqrt(det.eta1 * ch.eta_t) * a.real(), std::sqrt(det.eta2 * ch.eta_t) * a.imag()),
            1.0 + det.eta1 * ch.eta_t * ch.xi / 2.0 + det.nu1, 1.0 + det.eta2 * ch.eta_t * ch.xi / 2.0 + det.nu2};
}

}  // namespace

double pdf_outcome(cplx y, int x, const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp) {
    const auto g = outcome_gaussian(x, ch, det, pp);
    const double dq = y.real() - g.mean.real(), dp = y.imag() - g.mean.imag();
    return std::exp(-dq * dq / g.v1 - dp * dp / g.v2) / (pi * std::sqrt(g.v1 * g.v2));
}

DiscretizedDistribution discretization_distribution(const ChannelModel& ch, const DetectorModel& det,
                                                    const ProtocolParams& pp) {
    ch.validate();
    det.validate();
    pp.validate();
    constexpr double tol = 1e-12;
    DiscretizedDistribution dd;
    const double delta = pp.delta_a;
    for (int x = 0; x < 4; ++x) {
        const auto g = outcome_gaussian(x, ch, det, pp);
        for (int z = 0; z < 4; ++z) {
            const double t0 = (2.0 * z - 1.0) * pi / 4.0, t1 = (2.0 * z + 1.0) * pi / 4.0;
            double mass;
            if (g.v1 == g.v2) {
                // Radial integral of the isotropic Gaussian in closed form.
                const double v = g.v1, c2 = std::norm(g.mean);
                auto radial = [&](double theta) {
                    const double ct = (g.mean * std::polar(1.0, -theta)).real();
                    const double s = (delta - ct) / std::sqrt(v);
                    return std::exp(-(c2 - ct * ct) / v) *
                           (0.5 * v * std::exp(-s * s) + ct * 0.5 * std::sqrt(pi * v) * std::erfc(s)) / (pi * v);
                };
                mass = quad::integrate(radial, t0, t1, tol).value;
            } else {
                const double rmax = delta + std::abs(g.mean) + 10.0 * std::sqrt(std::max(g.v1, g.v2));
                auto f = [&](double theta, double r) { return r * pdf_outcome(std::polar(r, theta), x, ch, det, pp); };
                mass = quad::integrate_2d(f, t0, t1, delta, rmax, tol).value;
            }
            dd.joint[x][z] = ProtocolParams::priors[x] * mass;
        }
    }
    dd.p_pass = 0.0;
    for (const auto& row : dd.joint)
        for (double p : row) dd.p_pass += p;
    return dd;
}

namespace {

double entropy_bits(const double* p, int n) {
    double h = 0.0;
    for (int i = 0; i < n; ++i)
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h / std::log(2.0);
}

}  // namespace

EcCost ec_cost(const DiscretizedDistribution& dd, double beta) {
    if (!(dd.p_pass > 0.0)) throw std::invalid_argument("ec_cost: distribution has zero pass probability");
    std::array<double, 16> joint{};
    std::array<double, 4> px{}, pz{};
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) {
            const double p = dd.joint[x][z] / dd.p_pass;
            joint[4 * x + z] = p;
            px[x] += p;
            pz[z] += p;
        }
    const double hz = entropy_bits(pz.data(), 4);
    const double ixz = std::max(0.0, entropy_bits(px.data(), 4) + hz - entropy_bits(joint.data(), 16));
    return {hz - beta * ixz, dd.p_pass, hz, ixz};
}

double effective_excess_noise(const ChannelModel& ch, const DetectorModel& det) {
    return ch.xi + det.nu1 / (det.eta1 * ch.eta_t);
}

}  // namespace dmrate
