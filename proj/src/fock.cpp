#include "dmrate/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace dmrate {

FockOperator::FockOperator(Matrix entries, bool hermitian) : m_(std::move(entries)), hermitian_(hermitian) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
        throw std::invalid_argument("FockOperator: matrix must be square with dim >= 1");
    if (hermitian_) m_ = linalg::hermitian_part(m_);
}

FockOperator FockOperator::from_upper(const Matrix& upper) {
    Matrix m = upper;
    const int n = static_cast<int>(m.rows());
    for (int r = 0; r < n; ++r) {
        m(r, r) = m(r, r).real();
        for (int c = r + 1; c < n; ++c) m(c, r) = std::conj(m(r, c));
    }
    return FockOperator(std::move(m), true);
}

FockOperator FockOperator::identity(int dim) { return FockOperator(Matrix::Identity(dim, dim), true); }
FockOperator FockOperator::zero(int dim) { return FockOperator(Matrix::Zero(dim, dim), true); }

FockOperator FockOperator::operator+(const FockOperator& o) const {
    return FockOperator(m_ + o.m_, hermitian_ && o.hermitian_);
}
FockOperator FockOperator::operator-(const FockOperator& o) const {
    return FockOperator(m_ - o.m_, hermitian_ && o.hermitian_);
}
FockOperator FockOperator::operator*(double s) const { return FockOperator(m_ * s, hermitian_); }

Matrix annihilation(int N) {
    Matrix a = Matrix::Zero(N + 1, N + 1);
    for (int n = 1; n <= N; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

QuadratureOperators quadrature_operators(int N) {
    if (N < 1) throw std::invalid_argument("quadrature_operators: cutoff must be >= 1");
    const Matrix a = annihilation(N);
    const Matrix ad = a.adjoint();
    const double r2 = std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    return {FockOperator((ad + a) / r2, true), FockOperator(I * (ad - a) / r2, true),
            FockOperator(ad * a, true), FockOperator(a * a + ad * ad, true)};
}

cplx coherent_overlap(cplx a, cplx b) {
    return std::exp(-(std::norm(a) + std::norm(b)) / 2.0 + std::conj(b) * a);
}

namespace linalg {

void require_hermitian(const Matrix& m, double tol, const char* who) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
        throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
}

Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

Matrix sqrt_psd(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector ev = es.eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-10 * std::max(1.0, top))
            throw std::invalid_argument("sqrt_psd: matrix has a significantly negative eigenvalue");
        ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix log_clamped(const Matrix& m, double clamp_rel) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("log_clamped: matrix has no positive eigenvalue");
    const double floor = clamp_rel * top;
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::log(std::max(ev[i], floor));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace linalg

FockOperator hermitian_sqrt(const FockOperator& m) {
    linalg::require_hermitian(m.matrix(), 1e-12, "hermitian_sqrt");
    return FockOperator(linalg::sqrt_psd(m.matrix()), true);
}

FockOperator hermitian_log(const FockOperator& m, double clamp_rel) {
    linalg::require_hermitian(m.matrix(), 1e-12, "hermitian_log");
    return FockOperator(linalg::log_clamped(m.matrix(), clamp_rel), true);
}

}  // namespace dmrate
