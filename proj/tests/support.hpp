#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "dmrate/fock.hpp"

namespace testsupport {

using dmrate::cplx;
using dmrate::Matrix;

// Seeded generators for property checks. Every suite uses a fixed seed so failures reproduce.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    cplx complex_in_disk(double radius) {
        const double r = radius * std::sqrt(uniform(0.0, 1.0));
        return std::polar(r, uniform(0.0, 2.0 * 3.141592653589793));
    }

    Matrix complex_gaussian(int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = cplx(normal(), normal());
        return m;
    }
    Matrix hermitian(int n) {
        Matrix g = complex_gaussian(n, n);
        return (g + g.adjoint()) * 0.5;
    }
    // Full-rank density matrix with spectrum bounded away from zero.
    Matrix density(int n) {
        Matrix g = complex_gaussian(n, n);
        Matrix rho = g * g.adjoint() + 0.05 * Matrix::Identity(n, n);
        return rho / rho.trace().real();
    }

private:
    std::mt19937_64 rng_;
};

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testsupport
