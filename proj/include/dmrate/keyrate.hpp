#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dmrate/channel.hpp"
#include "dmrate/detector.hpp"
#include "dmrate/sdp.hpp"

namespace dmrate {

enum class Mode { trusted, untrusted };
const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct LinearConstraint {
    SeparableObservable op;
    double value;
    std::string label;
};

// Equality constraints on rho_AB (signal register A of dimension 4, mode B truncated at N).
// The unit-trace constraint is implied by the register constraints; it is kept separately for
// residual reporting and left out of the interior-point system, where it would make the
// constraint Gram matrix singular.
struct ConstraintSet {
    int cutoff = 0;
    Mode mode = Mode::trusted;
    Eigen::Matrix4cd rho_a;
    std::vector<LinearConstraint> constraints;
    LinearConstraint trace;

    int mode_dim() const { return cutoff + 1; }
    int dim() const { return 4 * mode_dim(); }
    SeparableSystem system() const;
    Eigen::VectorXd values() const;
    // Max absolute violation over all constraints including the trace.
    double max_residual(const Matrix& rho) const;
    // Copy keeping only the listed moment constraints (register constraints are always kept).
    ConstraintSet without_moments(const std::vector<int>& drop) const;
};

// rho_A[i][j] = sqrt(p_i p_j) <alpha_j|alpha_i>.
Eigen::Matrix4cd signal_gram(const ProtocolParams& pp);

// Moment constraints use {F_Q, F_P, S_Q, S_P} of the noisy detector in trusted mode and
// {q, p, n, d} with detector noise folded into the channel in untrusted mode.
ConstraintSet build_constraints(const SimulatedStatistics& stats, const ObservableSet& obs, const ProtocolParams& pp,
                                Mode mode);

// Kraus data of the key map: K = sum_z |z>_R (x) 1_A (x) sqrt(R_z).
struct PostprocessingMaps {
    int cutoff = 0;
    std::array<Matrix, 4> sqrt_r;  // on B
    Matrix pass;                   // sum_z R_z on B
    Matrix sqrt_pass;              // its square root

    int mode_dim() const { return cutoff + 1; }
    int dim() const { return 4 * mode_dim(); }
    // Dense K of shape (16 (N+1)) x (4 (N+1)).
    Matrix kraus() const;
};

PostprocessingMaps make_postprocessing_maps(const RegionOperators& regions);

// K rho K^dag on R (x) A (x) B.
FockOperator apply_G(const FockOperator& rho, const PostprocessingMaps& maps);
// Pinching with respect to the four register blocks.
FockOperator apply_Z(const FockOperator& sigma);

inline constexpr double kPerturbation = 1e-9;
inline constexpr double kLogClamp = 1e-12;

// D(G(rho) || Z(G(rho))) in bits, evaluated on (1 - eps) rho + eps 1/dim.
double objective(const FockOperator& rho, const PostprocessingMaps& maps, double eps = kPerturbation);
// Same quantity through the full G and Z maps on R (x) A (x) B; slower, kept as a cross-check.
double objective_direct(const FockOperator& rho, const PostprocessingMaps& maps, double eps = kPerturbation);
// Gradient of objective() with respect to rho, in bits.
FockOperator gradient(const FockOperator& rho, const PostprocessingMaps& maps, double eps = kPerturbation);

// Tr(a log a) - Tr(a log b) in nats with the relative eigenvalue clamp applied to both logs.
double relative_entropy(const Matrix& a, const Matrix& b, double clamp_rel = kLogClamp);

struct SolverOptions {
    double gap_tol = 1e-6;
    int max_iters = 300;
    double perturbation = kPerturbation;
    int line_search_points = 20;
    // Pairwise steps between stored atoms after each Frank-Wolfe step.
    int corrective_steps = 8;
    // Log-barrier Newton refinement, first run at this Frank-Wolfe iteration and then every
    // interior_period iterations until the gap closes. Negative disables it.
    int interior_start = 5;
    int interior_period = 25;
    int cg_max_iters = 30;
    SdpOptions sdp{};
    // When set, iteration stops as soon as the primal value drops below this threshold: the
    // minimum is then provably below it, so a rate floored at zero is already determined.
    std::optional<double> zero_rate_threshold;
    // key_rate() fills zero_rate_threshold with p_pass * delta_EC when this is set.
    bool stop_at_zero_rate = true;
};

enum class SolveStatus { converged, zero_rate, max_iterations, stalled };
const char* to_string(SolveStatus s);

struct KeyRateResult {
    double primal_value = 0.0;  // bits, objective at the final iterate
    double lower_bound = 0.0;   // bits, certified via the linearization dual
    double delta_ec = 0.0;
    double p_pass = 0.0;
    double rate = 0.0;
    int iterations = 0;
    double constraint_residual = 0.0;
    double min_eigenvalue = 0.0;
    double trace = 0.0;
    SolveStatus status = SolveStatus::max_iterations;
    bool certified = false;
    Matrix rho;

    bool converged() const { return status == SolveStatus::converged || status == SolveStatus::zero_rate; }
};

// Point satisfying the constraints with full rank, from an interior-point solve with a constant
// objective. Throws InfeasibleConstraints when none is found.
Matrix feasible_point(const ConstraintSet& cs, const SdpOptions& opts = {});

KeyRateResult solve(const ConstraintSet& cs, const PostprocessingMaps& maps, const SolverOptions& opts = {});

// R = lower_bound - p_pass * delta_EC, floored at zero.
KeyRateResult key_rate(const ConstraintSet& cs, const PostprocessingMaps& maps, const EcCost& ec,
                       SolverOptions opts = {});

}  // namespace dmrate
