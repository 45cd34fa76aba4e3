#include "dmrate/detector.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dmrate/quadrature.hpp"
#include "dmrate/special.hpp"

namespace dmrate {

using std::numbers::pi;

void DetectorModel::validate() const {
    for (double eta : {eta1, eta2})
        if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("detector efficiency must lie in (0, 1]");
    for (double nu : {nu1, nu2})
        if (!(nu >= 0.0)) throw std::invalid_argument("electronic noise must be nonnegative");
}

double DetectorModel::lambda(int arm) const {
    const double eta = arm == 1 ? eta1 : eta2;
    const double nu = arm == 1 ? nu1 : nu2;
    return (1.0 - eta + nu) / eta;
}

double DetectorModel::ancillary_nbar(int arm) const {
    const double eta = arm == 1 ? eta1 : eta2;
    const double nu = arm == 1 ? nu1 : nu2;
    if (eta == 1.0) {
        if (nu == 0.0) return 0.0;
        throw std::invalid_argument("ancillary thermal state undefined for unit efficiency with noise");
    }
    return nu / (2.0 * (1.0 - eta));
}

GeneralPovmParams GeneralPovmParams::from(const DetectorModel& det, cplx y) {
    GeneralPovmParams p;
    p.lambda1 = det.lambda(1);
    p.lambda2 = det.lambda(2);
    p.nbar_het = (std::sqrt((1.0 + 2.0 * p.lambda1) * (1.0 + 2.0 * p.lambda2)) - 1.0) / 2.0;
    p.xi_het = 0.25 * std::log((1.0 + 2.0 * p.lambda2) / (1.0 + 2.0 * p.lambda1));
    p.alpha_het = cplx(y.real() / std::sqrt(det.eta1), y.imag() / std::sqrt(det.eta2));
    return p;
}

WignerGaussian povm_wigner(const DetectorModel& det, cplx y) {
    const auto p = GeneralPovmParams::from(det, y);
    auto w = wigner_state(StateKind::displaced_squeezed_thermal, {p.alpha_het, p.xi_het, p.nbar_het});
    w.prefactor /= std::sqrt(det.eta1 * det.eta2) * pi;
    return w;
}

namespace {

double sqrt_factorial_ratio(int m, int n) { return std::exp(0.5 * (log_factorial(m) - log_factorial(n))); }

void require_cutoff(int N, int min_cutoff, const char* who) {
    if (N < min_cutoff) throw std::invalid_argument(std::string(who) + ": cutoff too small");
}

}  // namespace

Matrix displaced_thermal_matrix(cplx a, double nbar, int N) {
    require_cutoff(N, 0, "displaced_thermal_matrix");
    Matrix m(N + 1, N + 1);
    const double a2 = std::norm(a);
    if (nbar < kIdealNoiseThreshold) {
        const double env = std::exp(-a2);
        std::vector<cplx> pw(N + 1);
        for (int k = 0; k <= N; ++k) pw[k] = std::pow(a, k) * std::exp(-0.5 * log_factorial(k));
        for (int r = 0; r <= N; ++r)
            for (int c = 0; c <= N; ++c) m(r, c) = env * pw[r] * std::conj(pw[c]);
        return m;
    }
    const double u = a2 / (1.0 + nbar);
    const double env = std::exp(-u);
    const double log1n = std::log1p(nbar);
    for (int r = 0; r <= N; ++r) {
        m(r, r) = env * scaled_laguerre(r, 0, u, nbar) * std::exp(-(r + 1) * log1n);
        for (int c = r + 1; c <= N; ++c) {
            const int j = c - r;
            const double mag = env * sqrt_factorial_ratio(r, c) * scaled_laguerre(r, j, u, nbar) *
                               std::exp(-(c + 1) * log1n);
            m(r, c) = mag * std::pow(std::conj(a), j);
            m(c, r) = std::conj(m(r, c));
        }
    }
    return m;
}

FockOperator povm_element_simple(cplx y, const DetectorModel& det, int N) {
    det.validate();
    require_cutoff(N, 1, "povm_element_simple");
    if (!det.simple_case()) throw std::invalid_argument("povm_element_simple: detector arms differ");
    const double eta = det.eta1;
    const double nbar = det.lambda(1);
    return FockOperator::hermitian(displaced_thermal_matrix(y / std::sqrt(eta), nbar, N) / (eta * pi));
}

FockOperator povm_element_general(cplx y, const DetectorModel& det, int N) {
    det.validate();
    require_cutoff(N, 1, "povm_element_general");
    const auto p = GeneralPovmParams::from(det, y);
    const double scale = 1.0 / (std::sqrt(det.eta1 * det.eta2) * pi);
    if (std::abs(p.lambda1 - p.lambda2) < kSymmetricThreshold)
        return FockOperator::hermitian(displaced_thermal_matrix(p.alpha_het, p.lambda1, N) * scale);

    const double l1 = p.lambda1 + 1.0, l2 = p.lambda2 + 1.0;
    const double A = 1.0 - (p.lambda1 + p.lambda2 + 2.0) / (2.0 * l1 * l2);
    const double B = (p.lambda1 - p.lambda2) / (2.0 * l1 * l2);
    const double re = p.alpha_het.real(), im = p.alpha_het.imag();
    const cplx C(re / l1, im / l2);
    const double q0 = std::exp(-re * re / l1 - im * im / l2) / (pi * std::sqrt(l1 * l2));

    // P_l(z) = r^l H_l(z / (2r)) with r^2 = -B/2, generated without choosing a root of B.
    auto poly = [&](cplx z) {
        std::vector<cplx> P(N + 1);
        P[0] = 1.0;
        if (N >= 1) P[1] = z;
        for (int l = 1; l < N; ++l) P[l + 1] = z * P[l] + double(l) * B * P[l - 1];
        return P;
    };
    const auto Pc = poly(C);
    const auto Pcc = poly(std::conj(C));
    std::vector<double> Apow(N + 1, 1.0);
    for (int k = 1; k <= N; ++k) Apow[k] = Apow[k - 1] * A;

    Matrix upper = Matrix::Zero(N + 1, N + 1);
    for (int m = 0; m <= N; ++m) {
        for (int n = m; n <= N; ++n) {
            cplx sum = 0.0;
            for (int k = 0; k <= m; ++k) {
                const double w = std::exp(0.5 * (log_factorial(m) + log_factorial(n)) - log_factorial(k) -
                                          log_factorial(m - k) - log_factorial(n - k));
                sum += w * Apow[k] * Pc[m - k] * Pcc[n - k];
            }
            upper(m, n) = sum * q0 / std::sqrt(det.eta1 * det.eta2);
        }
    }
    return FockOperator::from_upper(upper);
}

FockOperator povm_element(cplx y, const DetectorModel& det, int N) {
    return det.simple_case() ? povm_element_simple(y, det, N) : povm_element_general(y, det, N);
}

cplx povm_oracle_entry(int m, int n, cplx y, const DetectorModel& det) {
    if (m < 0 || n < 0 || m > 20 || n > 20) throw std::invalid_argument("povm_oracle_entry: index out of range");
    det.validate();
    const auto w = povm_wigner(det, y);
    const IntegrationBox box{0.0, std::max(6.0, std::abs(w.center) + 6.0 * w.sigma_max())};
    auto wf = [m, n](cplx g) { return fock_transition_wigner(n, m, g); };
    return overlap_integral_complex(wf, w, box);
}

FockOperator RegionOperators::sum() const { return R[0] + R[1] + R[2] + R[3]; }

namespace {

// Integral over theta in the sector of e^{i(m-n)theta}.
cplx sector_phase(int m, int n, int j) {
    if (m == n) return pi / 2.0;
    const double k = m - n;
    const cplx I(0.0, 1.0);
    return I * (std::exp(I * k * (2.0 * j - 1.0) * pi / 4.0) - std::exp(I * k * (2.0 * j + 1.0) * pi / 4.0)) / k;
}

// Outer radius beyond which the POVM weight of photon numbers <= N is negligible.
double radial_cutoff(const DetectorModel& det, int N, double delta) {
    const double s = std::max(det.eta1 * (1.0 + det.lambda(1)), det.eta2 * (1.0 + det.lambda(2)));
    return delta + std::sqrt(s) * (std::sqrt(double(N)) + 7.0);
}

void check_slow_path(int N, const NumericalPathOptions& opts, const char* who) {
    if (N > opts.slow_path_cap && !opts.allow_large_cutoff)
        throw std::invalid_argument(std::string(who) + ": general-detector numerical path is capped at N = " +
                                    std::to_string(opts.slow_path_cap) + " unless explicitly allowed");
}

RegionOperators region_operators_simple(const DetectorModel& det, double delta, int N, const NumericalPathOptions& opts) {
    const double eta = det.eta1;
    const double nbar = det.lambda(1);
    const double s = eta * (1.0 + nbar);
    const double log1n = std::log1p(nbar);
    // C'_{m,n} = C_{m,n} / nbar^m.
    auto cprime = [&](int m, int n) {
        return sqrt_factorial_ratio(m, n) * std::exp(-(n + 1) * log1n) / (pi * std::pow(eta, (n - m) / 2.0 + 1.0));
    };

    // Radial weight over [0, infinity) for each m <= n.
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int m = 0; m <= N; ++m)
        for (int n = m + 1; n <= N; ++n) {
            const int j = n - m;
            full(m, n) = 0.5 * std::pow(s, j / 2.0 + 1.0) * std::tgamma(j / 2.0 + 1.0) *
                         scaled_taylor_f(m, nbar, j, j / 2.0);
        }

    // Radial weight over the disk [0, delta], subtracted for postselection.
    Eigen::MatrixXd disk = Eigen::MatrixXd::Zero(N + 1, N + 1);
    if (delta > 0.0) {
        auto integrand = [&](double r) {
            Eigen::MatrixXd v = Eigen::MatrixXd::Zero(N + 1, N + 1);
            const double u = r * r / s;
            const double env = std::exp(-u);
            for (int m = 0; m <= N; ++m)
                for (int n = m; n <= N; ++n)
                    v(m, n) = env * scaled_laguerre(m, n - m, u, nbar) * std::pow(r, n - m + 1);
            return v;
        };
        disk = quad::integrate(integrand, 0.0, delta, opts.radial_tol).value;
    }

    RegionOperators out;
    out.delta_a = delta;
    for (int j = 0; j < 4; ++j) {
        Matrix upper = Matrix::Zero(N + 1, N + 1);
        for (int m = 0; m <= N; ++m) {
            upper(m, m) = 0.25 - (pi / 2.0) * cprime(m, m) * disk(m, m);
            for (int n = m + 1; n <= N; ++n)
                upper(m, n) = cprime(m, n) * sector_phase(m, n, j) * (full(m, n) - disk(m, n));
        }
        out.R[j] = FockOperator::from_upper(upper);
    }
    return out;
}

RegionOperators region_operators_numeric(const DetectorModel& det, double delta, int N, const NumericalPathOptions& opts) {
    check_slow_path(N, opts, "region_operators");
    const double rmax = radial_cutoff(det, N, delta);
    RegionOperators out;
    out.delta_a = delta;
    out.numerical_fallback = true;
    for (int j = 0; j < 4; ++j) {
        auto f = [&](double theta, double r) -> Matrix {
            return povm_element_general(std::polar(r, theta), det, N).matrix() * r;
        };
        const double t0 = (2.0 * j - 1.0) * pi / 4.0, t1 = (2.0 * j + 1.0) * pi / 4.0;
        Matrix m = quad::integrate_2d(f, t0, t1, delta, rmax, opts.slow_path_tol).value;
        out.R[j] = FockOperator::hermitian(m);
    }
    return out;
}

}  // namespace

RegionOperators region_operators(const DetectorModel& det, double delta_a, int N, const NumericalPathOptions& opts) {
    det.validate();
    require_cutoff(N, 1, "region_operators");
    if (!(delta_a >= 0.0)) throw std::invalid_argument("region_operators: negative postselection radius");
    return det.simple_case() ? region_operators_simple(det, delta_a, N, opts)
                             : region_operators_numeric(det, delta_a, N, opts);
}

const FockOperator& MomentObservables::operator[](int i) const {
    switch (i) {
        case 0: return fq;
        case 1: return fp;
        case 2: return sq;
        case 3: return sp;
        default: throw std::out_of_range("MomentObservables index");
    }
}

namespace {

MomentObservables moments_simple(const DetectorModel& det, int N) {
    const double eta = det.eta1;
    const double nbar = det.lambda(1);
    const double s = eta * (1.0 + nbar);
    const double log1n = std::log1p(nbar);
    auto cprime = [&](int m, int n) {
        return sqrt_factorial_ratio(m, n) * std::exp(-(n + 1) * log1n) / (pi * std::pow(eta, (n - m) / 2.0 + 1.0));
    };
    const cplx I(0.0, 1.0);
    Matrix fq = Matrix::Zero(N + 1, N + 1), fp = fq, sq = fq, sp = fq;
    for (int m = 0; m <= N; ++m) {
        const double diag = pi * cprime(m, m) * s * s * scaled_taylor_f(m, nbar, 0.0, 1.0);
        sq(m, m) = diag;
        sp(m, m) = diag;
        if (m + 1 <= N) {
            const double v = (pi / std::sqrt(2.0)) * cprime(m, m + 1) * s * s * scaled_taylor_f(m, nbar, 1.0, 1.0);
            fq(m, m + 1) = v;
            fp(m, m + 1) = -I * v;
        }
        if (m + 2 <= N) {
            const double v = pi * cprime(m, m + 2) * s * s * s * scaled_taylor_f(m, nbar, 2.0, 2.0);
            sq(m, m + 2) = v;
            sp(m, m + 2) = -v;
        }
    }
    return {FockOperator::from_upper(fq), FockOperator::from_upper(fp), FockOperator::from_upper(sq),
            FockOperator::from_upper(sp), false};
}

MomentObservables moments_numeric(const DetectorModel& det, int N, const NumericalPathOptions& opts) {
    check_slow_path(N, opts, "moment_observables");
    const double rmax = radial_cutoff(det, N, 0.0);
    const int d = N + 1;
    auto f = [&](double theta, double r) -> Matrix {
        const Matrix g = povm_element_general(std::polar(r, theta), det, N).matrix() * r;
        const double q = r * std::cos(theta), p = r * std::sin(theta);
        Matrix out(d, 4 * d);
        out.block(0, 0, d, d) = g * (std::sqrt(2.0) * q);
        out.block(0, d, d, d) = g * (std::sqrt(2.0) * p);
        out.block(0, 2 * d, d, d) = g * (2.0 * q * q);
        out.block(0, 3 * d, d, d) = g * (2.0 * p * p);
        return out;
    };
    const Matrix all = quad::integrate_2d(f, 0.0, 2.0 * pi, 0.0, rmax, opts.slow_path_tol).value;
    return {FockOperator::hermitian(all.block(0, 0, d, d)), FockOperator::hermitian(all.block(0, d, d, d)),
            FockOperator::hermitian(all.block(0, 2 * d, d, d)), FockOperator::hermitian(all.block(0, 3 * d, d, d)),
            true};
}

}  // namespace

MomentObservables moment_observables(const DetectorModel& det, int N, const NumericalPathOptions& opts) {
    det.validate();
    require_cutoff(N, 2, "moment_observables");
    return det.simple_case() ? moments_simple(det, N) : moments_numeric(det, N, opts);
}

ObservableSet observable_set(const DetectorModel& det, double delta_a, int N, const NumericalPathOptions& opts) {
    return {moment_observables(det, N, opts), region_operators(det, delta_a, N, opts)};
}

}  // namespace dmrate
