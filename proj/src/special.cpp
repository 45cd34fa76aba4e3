#include "dmrate/special.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dmrate {

double laguerre(int k, int j, double x) {
    if (k < 0 || j < 0) throw std::invalid_argument("laguerre: negative degree or order");
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = 1.0 + j - x;
    for (int i = 1; i < k; ++i) {
        double next = ((2.0 * i + 1.0 + j - x) * cur - (i + j) * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double scaled_laguerre(int k, int j, double u, double nbar) {
    if (k < 0 || j < 0) throw std::invalid_argument("scaled_laguerre: negative degree or order");
    if (nbar < 0.0) throw std::invalid_argument("scaled_laguerre: negative nbar");
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = nbar * (1.0 + j) + u;
    const double n2 = nbar * nbar;
    for (int i = 1; i < k; ++i) {
        double next = (((2.0 * i + 1.0 + j) * nbar + u) * cur - (i + j) * n2 * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

std::complex<double> hermite(int l, std::complex<double> z) {
    if (l < 0) throw std::invalid_argument("hermite: negative order");
    std::complex<double> prev = 1.0;
    if (l == 0) return prev;
    std::complex<double> cur = 2.0 * z;
    for (int i = 1; i < l; ++i) {
        std::complex<double> next = 2.0 * z * cur - 2.0 * double(i) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double gbinom(double x, int i) {
    double c = 1.0;
    for (int t = 0; t < i; ++t) c *= (x - t) / (t + 1.0);
    return c;
}

namespace {

// Series coefficients of (1-t)^{-beta}: C(beta+i-1, i), built incrementally.
std::vector<double> neg_binomial_series(double beta, int n) {
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (int i = 1; i <= n; ++i) c[i] = c[i - 1] * (beta + i - 1.0) / i;
    return c;
}

}  // namespace

double taylor_f(int n, double a, double alpha, double k) {
    if (n < 0) throw std::invalid_argument("taylor_f: negative order");
    if (!(a > 0.0)) throw std::invalid_argument("taylor_f: a must be positive");
    const auto first = neg_binomial_series(alpha - k, n);
    const auto second = neg_binomial_series(k + 1.0, n);
    const double c = 1.0 + 1.0 / a;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) sum += first[i] * second[n - i] * std::pow(c, n - i);
    return sum;
}

double scaled_taylor_f(int n, double a, double alpha, double k) {
    if (n < 0) throw std::invalid_argument("scaled_taylor_f: negative order");
    if (a < 0.0) throw std::invalid_argument("scaled_taylor_f: a must be nonnegative");
    const auto first = neg_binomial_series(alpha - k, n);
    const auto second = neg_binomial_series(k + 1.0, n);
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) sum += first[i] * second[n - i] * std::pow(a, i) * std::pow(1.0 + a, n - i);
    return sum;
}

double log_factorial(int m) { return std::lgamma(m + 1.0); }

}  // namespace dmrate
