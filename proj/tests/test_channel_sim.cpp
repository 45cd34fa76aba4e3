#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dmrate/channel.hpp"
#include "dmrate/quadrature.hpp"
#include "support.hpp"

using namespace dmrate;
using std::numbers::pi;

namespace {

const DetectorModel kFig3Det = DetectorModel::symmetric(0.719, 0.01);

ProtocolParams params(double alpha, double delta = 0.0, double beta = 0.95, int N = 12) {
    return ProtocolParams{alpha, delta, beta, N};
}

// Sector masses by Cartesian quadrature: sector z is the image of {q > |p|} under rotation by i^z,
// with the disk |y| < delta cut out of the inner p-range.
DiscretizedDistribution cartesian_distribution(const ChannelModel& ch, const DetectorModel& det, const ProtocolParams& pp) {
    DiscretizedDistribution dd;
    const double R = 12.0, d = pp.delta_a;
    const std::array<cplx, 4> rot{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) {
            auto outer = [&](double q) {
                auto inner = [&](double p) { return pdf_outcome(rot[z] * cplx(q, p), x, ch, det, pp); };
                if (q >= d) return quad::integrate(inner, -q, q, 1e-13).value;
                const double h = std::sqrt(d * d - q * q);
                if (h >= q) return 0.0;
                return quad::integrate(inner, -q, -h, 1e-13).value + quad::integrate(inner, h, q, 1e-13).value;
            };
            double mass = 0.0;
            if (d > 0.0) mass += quad::integrate(outer, d / std::sqrt(2.0), d, 1e-12).value;
            mass += quad::integrate(outer, std::max(d, 0.0), R, 1e-12).value;
            dd.joint[x][z] = 0.25 * mass;
        }
    for (const auto& row : dd.joint)
        for (double p : row) dd.p_pass += p;
    return dd;
}

}  // namespace

TEST_CASE("channel and protocol validation") {
    CHECK(ChannelModel::from_distance(10.0, 0.01).eta_t == doctest::Approx(std::pow(10.0, -0.2)).epsilon(1e-15));
    CHECK(ChannelModel::from_distance(0.0, 0.0).eta_t == 1.0);
    CHECK_THROWS_AS(ChannelModel::from_distance(-1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(ChannelModel::from_transmittance(0.5, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(params(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.7, -0.2).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.7, 0.0, 1.2).validate(), std::invalid_argument);
    const auto pp = params(0.75);
    CHECK(std::abs(pp.signal(1) - cplx(0.0, 0.75)) < 1e-15);
    CHECK(std::abs(pp.signal(2) + 0.75) < 1e-15);
}

TEST_CASE("simulated statistics") {
    const auto ideal = simulate_statistics(ChannelModel::from_transmittance(1.0, 0.0), DetectorModel::ideal(), params(0.6));
    CHECK(ideal.moments[0][kSQ] == doctest::Approx(2 * 0.36 + 1).epsilon(1e-15));

    const auto ch = ChannelModel::from_distance(10.0, 0.01);
    const auto pp = params(0.75);
    const auto st = simulate_statistics(ch, kFig3Det, pp);
    CHECK(st.moments[0][kFQ] == doctest::Approx(std::sqrt(2 * 0.719 * std::pow(10.0, -0.2)) * 0.75).epsilon(1e-15));
    for (int x = 0; x < 4; ++x) {
        const auto& m = st.moments[x];
        CHECK(m[kFQ] * m[kFQ] + m[kFP] * m[kFP] == doctest::Approx(2 * 0.719 * ch.eta_t * 0.5625).epsilon(1e-14));
        CHECK(m[kSQ] >= m[kFQ] * m[kFQ]);
        CHECK(m[kSP] >= m[kFP] * m[kFP]);
    }
}

TEST_CASE("truncated Fock traces converge to the closed-form statistics") {
    const auto ch = ChannelModel::from_distance(20.0, 0.01);
    const auto pp = params(0.75);
    const int N = 20;
    const auto obs = moment_observables(kFig3Det, N);
    const auto st = simulate_statistics(ch, kFig3Det, pp);
    for (int x = 0; x < 4; ++x) {
        const Matrix sigma = received_state(ch, pp, x, N);
        for (int k = 0; k < 4; ++k)
            CHECK(std::abs((sigma * obs[k].matrix()).trace().real() - st.moments[x][k]) < 1e-6);
    }
}

TEST_CASE("general-detector statistics through the numerical observables") {
    const DetectorModel det{0.8, 0.6, 0.02, 0.05};
    const auto ch = ChannelModel::from_distance(15.0, 0.01);
    ProtocolParams pp = params(0.7, 0.0, 0.95, 8);
    const auto st = simulate_statistics(ch, det, pp);
    for (int x = 0; x < 4; ++x) {
        const cplx a = pp.signal(x);
        // Per-arm version of the symmetric closed form, from the Gaussian outcome density.
        const double e1 = det.eta1 * ch.eta_t, e2 = det.eta2 * ch.eta_t;
        CHECK(std::abs(st.moments[x][kFQ] - std::sqrt(2 * e1) * a.real()) < 1e-6);
        CHECK(std::abs(st.moments[x][kFP] - std::sqrt(2 * e2) * a.imag()) < 1e-6);
        CHECK(std::abs(st.moments[x][kSQ] - (2 * e1 * a.real() * a.real() + 1 + e1 * ch.xi / 2 + det.nu1)) < 1e-6);
        CHECK(std::abs(st.moments[x][kSP] - (2 * e2 * a.imag() * a.imag() + 1 + e2 * ch.xi / 2 + det.nu2)) < 1e-6);
    }
}

TEST_CASE("untrusted conversion inverts the ideal-detector correspondence") {
    const auto st = simulate_statistics(ChannelModel::from_distance(5.0, 0.02), kFig3Det, params(0.8));
    const auto u = untrusted_expectations(st);
    for (int x = 0; x < 4; ++x) {
        CHECK(u[x][kN] + u[x][kD] / 2.0 + 1.0 == doctest::Approx(st.moments[x][kSQ]).epsilon(1e-14));
        CHECK(u[x][kN] - u[x][kD] / 2.0 + 1.0 == doctest::Approx(st.moments[x][kSP]).epsilon(1e-14));
        CHECK(u[x][kQ] == st.moments[x][kFQ]);
    }
}

TEST_CASE("outcome density") {
    const auto ch = ChannelModel::from_distance(10.0, 0.01);
    const auto pp = params(0.75);
    const double v = 1.0 + 0.719 * ch.eta_t * 0.01 / 2.0 + 0.01;
    const cplx centre = std::sqrt(0.719 * ch.eta_t) * pp.signal(1);
    CHECK(pdf_outcome(centre, 1, ch, kFig3Det, pp) == doctest::Approx(1.0 / (pi * v)).epsilon(1e-14));
    auto f = [&](double q, double p) { return pdf_outcome(cplx(q, p), 3, ch, kFig3Det, pp); };
    CHECK(quad::integrate_2d(f, -10, 10, -10, 10, 1e-12).value == doctest::Approx(1.0).epsilon(1e-10));
    // Ideal detector, no excess noise: Husimi function of the coherent state sqrt(eta_t) alpha_x.
    const auto pure = ChannelModel::from_transmittance(0.5, 0.0);
    const cplx y(0.2, -0.4), b = std::sqrt(0.5) * pp.signal(2);
    CHECK(pdf_outcome(y, 2, pure, DetectorModel::ideal(), pp) ==
          doctest::Approx(std::norm(coherent_overlap(b, y)) / pi).epsilon(1e-14));
}

TEST_CASE("discretized distribution") {
    const auto ch = ChannelModel::from_distance(20.0, 0.01);
    const auto dd = discretization_distribution(ch, kFig3Det, params(0.75));
    CHECK(dd.p_pass == doctest::Approx(1.0).epsilon(1e-11));
    for (int x = 0; x < 4; ++x) {
        double row = 0.0;
        for (int z = 0; z < 4; ++z) {
            row += dd.conditional(x, z);
            CHECK(dd.joint[x][z] >= 0.0);
            CHECK(dd.conditional(x, z) == doctest::Approx(dd.conditional((x + 1) % 4, (z + 1) % 4)).epsilon(1e-10));
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-11));
    }
    const auto strong = discretization_distribution(ChannelModel::from_transmittance(1.0, 0.0), DetectorModel::ideal(), params(6.0));
    for (int x = 0; x < 4; ++x) CHECK(strong.conditional(x, x) > 1.0 - 1e-6);

    double last = 2.0;
    for (double delta : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const auto d = discretization_distribution(ch, kFig3Det, params(0.75, delta));
        CHECK(d.p_pass <= last);
        last = d.p_pass;
    }
}

TEST_CASE("postselected distribution agrees with a Cartesian quadrature") {
    const auto ch = ChannelModel::from_distance(50.0, 0.01);
    const auto det = DetectorModel::symmetric(0.552, 0.015);
    const auto pp = params(0.75, 0.6);
    const auto polar = discretization_distribution(ch, det, pp);
    const auto cart = cartesian_distribution(ch, det, pp);
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) CHECK(std::abs(polar.joint[x][z] - cart.joint[x][z]) < 1e-9);
    // Asymmetric arms take the numerical radial route.
    const DetectorModel asym{0.7, 0.5, 0.01, 0.03};
    const auto a = discretization_distribution(ch, asym, pp);
    const auto b = cartesian_distribution(ch, asym, pp);
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) CHECK(std::abs(a.joint[x][z] - b.joint[x][z]) < 1e-9);
}

TEST_CASE("error-correction cost") {
    DiscretizedDistribution perfect;
    for (int x = 0; x < 4; ++x) perfect.joint[x][x] = 0.25;
    perfect.p_pass = 1.0;
    const auto c1 = ec_cost(perfect, 1.0);
    CHECK(std::abs(c1.delta_ec) < 1e-15);
    CHECK(c1.i_xz == doctest::Approx(2.0).epsilon(1e-15));

    DiscretizedDistribution uniform;
    for (auto& row : uniform.joint) row.fill(1.0 / 16.0);
    uniform.p_pass = 1.0;
    const auto c2 = ec_cost(uniform, 0.95);
    CHECK(std::abs(c2.i_xz) < 1e-15);
    CHECK(c2.delta_ec == doctest::Approx(2.0).epsilon(1e-15));

    DiscretizedDistribution empty;
    CHECK_THROWS_AS(ec_cost(empty, 0.95), std::invalid_argument);

    // Reference values of delta_EC for eta_d = 0.719, nu = 0.01, xi = 0.01, alpha = 0.75, beta = 0.95,
    // from an independent scipy evaluation of the sector integrals.
    const std::array<std::pair<double, double>, 5> ref{{{0, 1.68161}, {10, 1.79218}, {20, 1.86601}, {50, 1.96539}, {100, 1.99651}}};
    for (auto [L, value] : ref) {
        const auto c = ec_cost(discretization_distribution(ChannelModel::from_distance(L, 0.01), kFig3Det, params(0.75)), 0.95);
        CHECK(std::abs(c.delta_ec - value) < 1e-5);
        CHECK(c.i_xz >= 0.0);
        CHECK(c.i_xz <= std::min(2.0, c.h_z) + 1e-12);
    }
    // Same quantity from the Cartesian quadrature route.
    const auto ch = ChannelModel::from_distance(20.0, 0.01);
    const auto a = ec_cost(discretization_distribution(ch, kFig3Det, params(0.75)), 0.95);
    const auto b = ec_cost(cartesian_distribution(ch, kFig3Det, params(0.75)), 0.95);
    CHECK(std::abs(a.delta_ec - b.delta_ec) < 1e-6);
}

TEST_CASE("effective excess noise") {
    const double xi_eff = effective_excess_noise(ChannelModel::from_distance(20.0, 0.01), kFig3Det);
    CHECK(std::abs(xi_eff - 0.045) < 0.001);
}
