#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dmrate {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      // measured error or quantity
    double tolerance = 0.0;  // bound the value is compared against
    std::string detail;
};

// Analytic POVM entries against the Wigner-overlap quadrature on n_samples random (m, n, y) per
// detector case, plus the exact zero-radius region identities.
std::vector<CheckResult> oracle_checks(int n_samples = 50, std::uint64_t seed = 2024);

// Trivial limits: ideal-detector moment observables, vacuum noise, effective excess noise, noiseless
// source state feasibility, objective cross-check and one small certified solve.
std::vector<CheckResult> selftest_checks();

bool all_passed(const std::vector<CheckResult>& checks);
std::string format_check(const CheckResult& c);

}  // namespace dmrate
