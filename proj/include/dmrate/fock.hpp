#pragma once

#include <Eigen/Dense>
#include <complex>

namespace dmrate {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

// Square complex matrix in a truncated Fock basis (or a tensor product of such bases).
// A Hermitian-tagged operator is mirrored exactly at construction.
class FockOperator {
public:
    FockOperator() = default;
    FockOperator(Matrix entries, bool hermitian);

    // Keeps the upper triangle and the real part of the diagonal, mirrors the rest.
    static FockOperator from_upper(const Matrix& upper);
    static FockOperator hermitian(const Matrix& m) { return FockOperator(m, true); }
    static FockOperator identity(int dim);
    static FockOperator zero(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    int cutoff() const { return dim() - 1; }
    bool is_hermitian() const { return hermitian_; }
    const Matrix& matrix() const { return m_; }
    cplx operator()(int r, int c) const { return m_(r, c); }

    FockOperator operator+(const FockOperator& o) const;
    FockOperator operator-(const FockOperator& o) const;
    FockOperator operator*(double s) const;

private:
    Matrix m_;
    bool hermitian_ = false;
};

struct QuadratureOperators {
    FockOperator q, p, n, d;
};

// Truncated q = (a^dag + a)/sqrt2, p = i(a^dag - a)/sqrt2, n = a^dag a, d = a^2 + a^dag^2.
QuadratureOperators quadrature_operators(int N);

// Annihilation operator on {|0>, ..., |N>}.
Matrix annihilation(int N);

// <b|a> for coherent states.
cplx coherent_overlap(cplx a, cplx b);

// Hermitian functional calculus. Eigenvalues below clamp_rel * lambda_max are raised
// to that threshold before the log and set to zero before the square root.
FockOperator hermitian_sqrt(const FockOperator& m);
FockOperator hermitian_log(const FockOperator& m, double clamp_rel = 1e-12);

namespace linalg {

// Throws std::invalid_argument when |m - m^dag| exceeds tol * max(1, |m|).
void require_hermitian(const Matrix& m, double tol, const char* who);
Matrix hermitian_part(const Matrix& m);
Matrix sqrt_psd(const Matrix& m);
Matrix log_clamped(const Matrix& m, double clamp_rel);
double min_eigenvalue(const Matrix& m);

}  // namespace linalg

}  // namespace dmrate
