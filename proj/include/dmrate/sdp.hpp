#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dmrate/fock.hpp"

namespace dmrate {

// Observable r (x) O on a register of dimension reg_dim times a mode of dimension mode_dim.
// r is stored by its nonzero entries; an empty mode matrix stands for the identity.
struct SeparableObservable {
    struct Entry {
        int row, col;
        cplx value;
    };
    std::vector<Entry> reg;
    Matrix mode;

    bool mode_is_identity() const { return mode.size() == 0; }
    Matrix dense(int reg_dim, int mode_dim) const;
};

// Linear map X -> (Re Tr(G_i X))_i for a list of separable Hermitian observables G_i, with the
// adjoint, Gram matrix and interior-point Schur complement specialized to the block structure.
class SeparableSystem {
public:
    SeparableSystem(int reg_dim, int mode_dim, std::vector<SeparableObservable> obs);

    int size() const { return static_cast<int>(obs_.size()); }
    int dim() const { return reg_dim_ * mode_dim_; }
    int reg_dim() const { return reg_dim_; }
    int mode_dim() const { return mode_dim_; }
    const SeparableObservable& observable(int i) const { return obs_[i]; }

    Eigen::VectorXd apply(const Matrix& X) const;
    Matrix adjoint(const Eigen::VectorXd& y) const;
    // M_ij = Re Tr(G_i X G_j W).
    Eigen::MatrixXd schur(const Matrix& X, const Matrix& W) const;
    // Re Tr(G_i G_j).
    const Eigen::MatrixXd& gram() const { return gram_; }
    // Least-norm Hermitian correction restoring apply(X) = b.
    Matrix project_affine(const Matrix& X, const Eigen::VectorXd& b) const;

private:
    int reg_dim_, mode_dim_;
    std::vector<SeparableObservable> obs_;
    std::vector<Matrix> modes_;   // distinct mode operators, identity excluded
    std::vector<int> mode_index_;  // per observable, -1 for identity
    Eigen::MatrixXd gram_;
    Eigen::LDLT<Eigen::MatrixXd> gram_factor_;
};

struct SdpOptions {
    double tol = 1e-9;
    int max_iters = 100;
    double step_fraction = 0.98;
};

struct SdpResult {
    Matrix X, Z;
    Eigen::VectorXd y;
    int iterations = 0;
    bool converged = false;
    double primal_objective = 0.0, dual_objective = 0.0;
    double primal_residual = 0.0, dual_residual = 0.0;
    std::string message;
};

// Primal-dual interior-point method (HKM direction, Mehrotra predictor-corrector) for
//   min Re Tr(C X)  s.t.  A(X) = b, X >= 0
//   max b.y         s.t.  Z = C - A^*(y) >= 0
// over complex Hermitian matrices, from an infeasible starting point.
SdpResult solve_sdp(const SeparableSystem& A, const Matrix& C, const Eigen::VectorXd& b, const SdpOptions& opts = {});

}  // namespace dmrate
