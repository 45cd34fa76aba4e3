#pragma once

#include <complex>

namespace dmrate {

// Generalized Laguerre polynomial L_k^{(j)}(x) by three-term recurrence.
double laguerre(int k, int j, double x);

// nbar^k * L_k^{(j)}(-u / nbar), finite and continuous as nbar -> 0 where it tends to u^k / k!.
double scaled_laguerre(int k, int j, double u, double nbar);

// Physicists' Hermite polynomial H_l(z).
std::complex<double> hermite(int l, std::complex<double> z);

// Coefficient of t^n in (1-t)^{-alpha+k} (1-(1+1/a)t)^{-(k+1)}.
double taylor_f(int n, double a, double alpha, double k);

// a^n * taylor_f(n, a, alpha, k), written so that a = 0 is allowed.
double scaled_taylor_f(int n, double a, double alpha, double k);

// Generalized binomial coefficient C(x, i) for real x and integer i >= 0.
double gbinom(double x, int i);

// log(m!) through lgamma.
double log_factorial(int m);

}  // namespace dmrate
