#include "dmrate/sdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmrate {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Matrix SeparableObservable::dense(int reg_dim, int mode_dim) const {
    Matrix out = Matrix::Zero(reg_dim * mode_dim, reg_dim * mode_dim);
    const Matrix o = mode_is_identity() ? Matrix(Matrix::Identity(mode_dim, mode_dim)) : mode;
    for (const auto& e : reg) out.block(e.row * mode_dim, e.col * mode_dim, mode_dim, mode_dim) += e.value * o;
    return out;
}

SeparableSystem::SeparableSystem(int reg_dim, int mode_dim, std::vector<SeparableObservable> obs)
    : reg_dim_(reg_dim), mode_dim_(mode_dim), obs_(std::move(obs)) {
    if (reg_dim < 1 || mode_dim < 1) throw std::invalid_argument("SeparableSystem: empty factor");
    for (const auto& o : obs_) {
        if (!o.mode_is_identity() && (o.mode.rows() != mode_dim || o.mode.cols() != mode_dim))
            throw std::invalid_argument("SeparableSystem: mode operator has the wrong dimension");
        for (const auto& e : o.reg)
            if (e.row < 0 || e.col < 0 || e.row >= reg_dim || e.col >= reg_dim)
                throw std::invalid_argument("SeparableSystem: register entry out of range");
        int idx = -1;
        if (!o.mode_is_identity()) {
            for (std::size_t k = 0; k < modes_.size(); ++k)
                if (modes_[k].rows() == o.mode.rows() && modes_[k] == o.mode) idx = static_cast<int>(k);
            if (idx < 0) {
                modes_.push_back(o.mode);
                idx = static_cast<int>(modes_.size()) - 1;
            }
        }
        mode_index_.push_back(idx);
    }
    const int m = size();
    gram_.resize(m, m);
    for (int j = 0; j < m; ++j) {
        const VectorXd col = apply(obs_[j].dense(reg_dim_, mode_dim_));
        gram_.col(j) = col;
    }
    gram_ = 0.5 * (gram_ + gram_.transpose());
    gram_factor_.compute(gram_);
}

VectorXd SeparableSystem::apply(const Matrix& X) const {
    const int d = mode_dim_;
    VectorXd out(size());
    for (int i = 0; i < size(); ++i) {
        cplx acc = 0.0;
        for (const auto& e : obs_[i].reg) {
            const auto blk = X.block(e.col * d, e.row * d, d, d);
            const cplx tr = obs_[i].mode_is_identity() ? blk.trace() : obs_[i].mode.transpose().cwiseProduct(blk).sum();
            acc += e.value * tr;
        }
        out[i] = acc.real();
    }
    return out;
}

Matrix SeparableSystem::adjoint(const VectorXd& y) const {
    const int d = mode_dim_;
    Matrix out = Matrix::Zero(dim(), dim());
    for (int i = 0; i < size(); ++i) {
        if (y[i] == 0.0) continue;
        for (const auto& e : obs_[i].reg) {
            auto blk = out.block(e.row * d, e.col * d, d, d);
            if (obs_[i].mode_is_identity())
                blk.diagonal().array() += y[i] * e.value;
            else
                blk += (y[i] * e.value) * obs_[i].mode;
        }
    }
    return out;
}

MatrixXd SeparableSystem::schur(const Matrix& X, const Matrix& W) const {
    const int d = mode_dim_, r = reg_dim_, nm = static_cast<int>(modes_.size()) + 1;
    // OX[a][q][k] = O_a X_qk and OW[a][l][p] = O_a W_lp, with slot 0 for the identity.
    std::vector<Matrix> OX(nm * r * r), OW(nm * r * r);
    auto slot = [&](int a, int q, int k) { return (a * r + q) * r + k; };
    for (int q = 0; q < r; ++q)
        for (int k = 0; k < r; ++k) {
            OX[slot(0, q, k)] = X.block(q * d, k * d, d, d);
            OW[slot(0, q, k)] = W.block(q * d, k * d, d, d);
            for (int a = 1; a < nm; ++a) {
                OX[slot(a, q, k)].noalias() = modes_[a - 1] * OX[slot(0, q, k)];
                OW[slot(a, q, k)].noalias() = modes_[a - 1] * OW[slot(0, q, k)];
            }
        }
    // Transposes of the OX blocks so each trace is a coefficient-wise product.
    for (auto& m : OX) m.transposeInPlace();
    const int m = size();
    MatrixXd M(m, m);
    for (int i = 0; i < m; ++i) {
        const int ai = mode_index_[i] + 1;
        for (int j = i; j < m; ++j) {
            const int aj = mode_index_[j] + 1;
            cplx acc = 0.0;
            for (const auto& ei : obs_[i].reg)
                for (const auto& ej : obs_[j].reg) {
                    // Tr(O_i X_{q k} O_j W_{l p}) with (p, q) from G_i and (k, l) from G_j.
                    const Matrix& a = OX[slot(ai, ei.col, ej.row)];
                    const Matrix& b = OW[slot(aj, ej.col, ei.row)];
                    acc += ei.value * ej.value * a.cwiseProduct(b).sum();
                }
            M(i, j) = M(j, i) = acc.real();
        }
    }
    return M;
}

Matrix SeparableSystem::project_affine(const Matrix& X, const VectorXd& b) const {
    const VectorXd z = gram_factor_.solve(b - apply(X));
    Matrix out = X + adjoint(z);
    return linalg::hermitian_part(out);
}

namespace {

// Largest step t <= 1 / frac keeping L L^dag + t D positive definite, from the spectrum of L^-1 D L^-dag.
double max_step(const Eigen::LLT<Matrix>& llt, const Matrix& D) {
    Matrix S = llt.matrixL().solve(D);
    S = llt.matrixL().solve(S.adjoint()).adjoint();
    S = linalg::hermitian_part(S);
    const double lmin = linalg::min_eigenvalue(S);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

}  // namespace

SdpResult solve_sdp(const SeparableSystem& A, const Matrix& C, const VectorXd& b, const SdpOptions& opts) {
    const int n = A.dim(), m = A.size();
    if (C.rows() != n || C.cols() != n || b.size() != m) throw std::invalid_argument("solve_sdp: dimension mismatch");
    const double cscale = std::max(1.0, C.cwiseAbs().maxCoeff());
    const Matrix Cs = linalg::hermitian_part(C) / cscale;
    const Matrix I = Matrix::Identity(n, n);

    SdpResult res;
    Matrix X = I / double(n);
    Matrix Z = I;
    VectorXd y = VectorXd::Zero(m);
    const double bnorm = 1.0 + b.norm(), cnorm = 1.0 + Cs.norm();

    auto finish = [&](bool ok, const std::string& msg) {
        res.X = linalg::hermitian_part(X);
        res.Z = linalg::hermitian_part(Z) * cscale;
        res.y = y * cscale;
        res.converged = ok;
        res.message = msg;
        res.primal_objective = (Cs * X).trace().real() * cscale;
        res.dual_objective = b.dot(y) * cscale;
        res.primal_residual = (b - A.apply(X)).cwiseAbs().maxCoeff();
        res.dual_residual = (Cs - A.adjoint(y) - Z).cwiseAbs().maxCoeff() * cscale;
        return res;
    };

    // Breakdowns once all three measures are within 1e3 tol still count as converged.
    bool near = false;
    auto fail = [&](const std::string& msg) {
        return near ? finish(true, "converged at reduced accuracy after: " + msg) : finish(false, msg);
    };

    for (int it = 0; it < opts.max_iters; ++it) {
        res.iterations = it;
        const VectorXd rp = b - A.apply(X);
        const Matrix Rd = Cs - A.adjoint(y) - Z;
        const double mu = (X * Z).trace().real() / n;
        const double pobj = (Cs * X).trace().real(), dobj = b.dot(y);
        const double pres = rp.norm() / bnorm, dres = Rd.norm() / cnorm;
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (pres < opts.tol && dres < opts.tol && gap < opts.tol) return finish(true, "converged");
        near = pres < 1e3 * opts.tol && dres < 1e3 * opts.tol && gap < 1e3 * opts.tol;

        Eigen::LLT<Matrix> lz(Z), lx(X);
        if (lz.info() != Eigen::Success || lx.info() != Eigen::Success)
            return fail("iterate lost positive definiteness");
        const Matrix W = lz.solve(I);
        const MatrixXd M = A.schur(X, W);
        Eigen::LDLT<MatrixXd> mf(M);
        if (mf.info() != Eigen::Success) return fail("Schur complement factorization failed");

        const Matrix XRd = X * Rd;
        auto direction = [&](const Matrix& Rc, VectorXd& dy, Matrix& dX, Matrix& dZ) {
            const VectorXd rhs = rp - A.apply((Rc - XRd) * W);
            dy = mf.solve(rhs);
            dZ = Rd - A.adjoint(dy);
            dX = linalg::hermitian_part((Rc - X * dZ) * W);
        };

        const Matrix XZ = X * Z;
        VectorXd dy;
        Matrix dX, dZ;
        direction(-XZ, dy, dX, dZ);
        if (!dy.allFinite() || !dX.allFinite()) return fail("non-finite predictor direction");
        double ap = std::min(1.0, max_step(lx, dX)), ad = std::min(1.0, max_step(lz, dZ));
        const double mu_aff = ((X + ap * dX) * (Z + ad * dZ)).trace().real() / n;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        const Matrix Rc = sigma * mu * I - XZ - dX * dZ;
        direction(Rc, dy, dX, dZ);
        if (!dy.allFinite() || !dX.allFinite()) return fail("non-finite corrector direction");
        ap = std::min(1.0, opts.step_fraction * max_step(lx, dX));
        ad = std::min(1.0, opts.step_fraction * max_step(lz, dZ));
        if (ap < 1e-12 && ad < 1e-12) return fail("step length collapsed");

        X = linalg::hermitian_part(X + ap * dX);
        y += ad * dy;
        Z = linalg::hermitian_part(Z + ad * dZ);
    }
    res.iterations = opts.max_iters;
    return fail("iteration limit reached");
}

}  // namespace dmrate
