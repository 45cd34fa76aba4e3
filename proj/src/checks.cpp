#include "dmrate/checks.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "dmrate/channel.hpp"
#include "dmrate/keyrate.hpp"

namespace dmrate {

namespace {

CheckResult bounded(std::string name, double value, double tol, std::string detail = {}) {
    return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double povm_oracle_error(const DetectorModel& a, const DetectorModel& b, int n_samples, std::mt19937_64& rng) {
    const int N = 8;
    std::uniform_int_distribution<int> idx(0, N);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const int m = idx(rng), n = idx(rng);
        const cplx y = std::polar(2.5 * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
        const auto& det = i % 2 == 0 ? a : b;
        worst = std::max(worst, std::abs(povm_element(y, det, N)(m, n) - povm_oracle_entry(m, n, y, det)));
    }
    return worst;
}

Matrix source_state(double alpha, int N) {
    const ProtocolParams pp{alpha, 0.0, 0.95, N};
    const int d = N + 1;
    Matrix v = Matrix::Zero(4 * d, 1);
    for (int x = 0; x < 4; ++x) {
        const cplx a = pp.signal(x);
        for (int n = 0; n < d; ++n)
            v(x * d + n) = 0.5 * std::exp(-0.5 * std::norm(a) - 0.5 * std::lgamma(n + 1.0)) * std::pow(a, n);
    }
    return v * v.adjoint();
}

}  // namespace

std::vector<CheckResult> oracle_checks(int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    const auto fig3 = DetectorModel::symmetric(0.719, 0.01), fig7 = DetectorModel::symmetric(0.552, 0.015);
    out.push_back(bounded("POVM vs Wigner oracle, equal arms", povm_oracle_error(fig3, fig7, n_samples, rng), 1e-6,
                          std::to_string(n_samples) + " samples"));
    out.push_back(bounded("POVM vs Wigner oracle, unequal arms",
                          povm_oracle_error({0.8, 0.6, 0.02, 0.05}, {0.55, 0.9, 0.03, 0.01}, n_samples, rng), 1e-6,
                          std::to_string(n_samples) + " samples"));

    double diag = 0.0, completeness = 0.0;
    for (const auto& det : {fig3, fig7, DetectorModel::ideal()})
        for (int N : {4, 12, 20}) {
            const auto R = region_operators(det, 0.0, N);
            for (int j = 0; j < 4; ++j)
                for (int n = 0; n <= N; ++n) diag = std::max(diag, std::abs(R.R[j](n, n).real() - 0.25));
            completeness = std::max(completeness, max_abs(R.sum().matrix() - Matrix::Identity(N + 1, N + 1)));
        }
    out.push_back(bounded("region diagonals equal 1/4 at zero radius", diag, 0.0, "exact"));
    out.push_back(bounded("regions sum to identity at zero radius", completeness, 1e-12));
    return out;
}

std::vector<CheckResult> selftest_checks() {
    std::vector<CheckResult> out;
    const int N = 12;
    const auto ops = quadrature_operators(N);
    const Matrix I = Matrix::Identity(N + 1, N + 1);
    for (const auto& det : {DetectorModel::ideal(), DetectorModel::symmetric(1.0 - 1e-13, 1e-13)}) {
        const auto m = moment_observables(det, N);
        const double err = std::max({max_abs(m.fq.matrix() - ops.q.matrix()), max_abs(m.fp.matrix() - ops.p.matrix()),
                                     max_abs(m.sq.matrix() - (ops.n.matrix() + ops.d.matrix() / 2.0 + I)),
                                     max_abs(m.sp.matrix() - (ops.n.matrix() - ops.d.matrix() / 2.0 + I))});
        char buf[64];
        std::snprintf(buf, sizeof buf, "eta_d = %.15g, nu_el = %.3g", det.eta1, det.nu1);
        out.push_back(bounded("ideal-detector moment observables", err, 1e-10, buf));
    }

    const auto fig3 = DetectorModel::symmetric(0.719, 0.01);
    const auto mo = moment_observables(fig3, N);
    out.push_back(bounded("vacuum second moments equal 1 + nu_el", std::abs(mo.sq(0, 0).real() - 1.01), 1e-12));

    const double xi_eff = effective_excess_noise(ChannelModel::from_distance(20.0, 0.01), fig3);
    out.push_back(bounded("effective excess noise at 20 km", std::abs(xi_eff - 0.045), 1e-3,
                          "xi_eff = " + std::to_string(xi_eff)));

    const ProtocolParams pp{0.75, 0.0, 0.95, 14};
    const auto ideal_obs = observable_set(DetectorModel::ideal(), 0.0, pp.cutoff);
    const auto noiseless =
        simulate_statistics(ChannelModel::from_transmittance(1.0, 0.0), DetectorModel::ideal(), pp);
    const Matrix psi = source_state(pp.alpha, pp.cutoff);
    double res = 0.0;
    for (Mode mode : {Mode::trusted, Mode::untrusted})
        res = std::max(res, build_constraints(noiseless, ideal_obs, pp, mode).max_residual(psi));
    out.push_back(bounded("noiseless source state satisfies the constraints", res, 1e-8));

    {
        const ProtocolParams small{0.75, 0.5, 0.95, 5};
        const auto obs = observable_set(fig3, small.delta_a, small.cutoff);
        const auto maps = make_postprocessing_maps(obs.regions);
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g;
        Matrix a(maps.dim(), maps.dim());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) a(i, j) = cplx(g(rng), g(rng));
        Matrix rho = a * a.adjoint() + 0.05 * Matrix::Identity(a.rows(), a.rows());
        rho /= rho.trace().real();
        const auto r = FockOperator::hermitian(rho);
        out.push_back(bounded("reduced objective matches direct relative entropy",
                              std::abs(objective(r, maps) - objective_direct(r, maps)), 1e-9));
    }

    {
        const ProtocolParams small{0.75, 0.0, 0.95, 6};
        const auto ch = ChannelModel::from_distance(20.0, 0.01);
        const auto obs = observable_set(fig3, 0.0, small.cutoff);
        const auto cs = build_constraints(simulate_statistics(ch, fig3, small), obs, small, Mode::trusted);
        const auto ec = ec_cost(discretization_distribution(ch, fig3, small), small.beta);
        const auto r = key_rate(cs, make_postprocessing_maps(obs.regions), ec);
        CheckResult c = bounded("small trusted solve is certified", r.lower_bound - r.primal_value, 1e-8,
                                std::string("status ") + to_string(r.status));
        c.passed = c.passed && r.converged() && r.certified && r.constraint_residual <= 1e-7 && r.min_eigenvalue >= -1e-9;
        out.push_back(c);
    }
    return out;
}

bool all_passed(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string format_check(const CheckResult& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-52s value %.3e  tol %.1e", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                  c.tolerance);
    std::string s = buf;
    if (!c.detail.empty()) s += "  (" + c.detail + ")";
    return s;
}

}  // namespace dmrate
