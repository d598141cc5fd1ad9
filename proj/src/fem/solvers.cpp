#include "maghom/fem/solvers.hpp"

#include "maghom/error.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace maghom::fem {

namespace {

void check_tolerance(double tol) {
    if (!(tol > 0.0 && tol <= 1e-4))
        throw ValidationError("solver tolerance must lie in (0, 1e-4], got " + std::to_string(tol));
}

std::vector<Vec> orthonormalize(const std::vector<Vec>& kernel) {
    std::vector<Vec> basis;
    for (const Vec& k : kernel) {
        Vec v = k;
        for (const Vec& q : basis) v -= q.dot(v) * q;
        const double n = v.norm();
        if (n > 0.0) basis.push_back(v / n);
    }
    return basis;
}

Vec safe_inverse(const Vec& diag) {
    Vec inv(diag.size());
    for (int i = 0; i < diag.size(); ++i) inv(i) = diag(i) > 0.0 ? 1.0 / diag(i) : 1.0;
    return inv;
}

} // namespace

int default_iteration_budget(int unknowns) {
    return std::max(10000, static_cast<int>(50.0 * std::sqrt(static_cast<double>(unknowns))));
}

Vec project_out(const Vec& x, const std::vector<Vec>& kernel) {
    Vec y = x;
    for (const Vec& q : orthonormalize(kernel)) y -= q.dot(y) * q;
    return y;
}

Vec solve_spd(const SparseMatrix& A, const Vec& b_in, double tol, const SpdOptions& options, SolveStats* stats) {
    check_tolerance(tol);
    const int n = A.rows();
    const auto basis = orthonormalize(options.kernel);
    Vec b = b_in;
    for (const Vec& q : basis) b -= q.dot(b) * q;

    Vec x = Vec::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return x;
    }
    const Vec minv = safe_inverse(A.diagonal());
    const int budget = options.max_iterations > 0 ? options.max_iterations : default_iteration_budget(n);

    Vec r = b;
    Vec z = minv.cwiseProduct(r);
    Vec p = z;
    double rz = r.dot(z);
    int it = 0;
    double rel = 1.0;
    while (it < budget) {
        const Vec ap = A * p;
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        ++it;
        rel = r.norm() / bnorm;
        if (rel <= tol) {
            // confirm with the true residual; recursion-free refresh
            r = b - A * x;
            rel = r.norm() / bnorm;
            if (rel <= tol) break;
        }
        z = minv.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    rel = (b - A * x).norm() / bnorm;
    for (const Vec& q : basis) x -= q.dot(x) * q;
    if (stats) *stats = {it, rel};
    if (!(rel <= tol)) throw NoConvergence("conjugate gradients did not converge", it, rel);
    return x;
}

namespace {

struct BlockOperator {
    const SparseMatrix& A;
    const SparseMatrix& B;
    const SparseMatrix& C;
    int nu, np;

    Vec apply(const Vec& x) const {
        Vec y(nu + np);
        const auto u = x.head(nu);
        const auto p = x.tail(np);
        y.head(nu) = A.csr() * u - B.csr().transpose() * p;
        y.tail(np) = -(B.csr() * u) - C.csr() * p;
        return y;
    }
};

/// Preconditioned MINRES (Paige-Saunders recurrences). Returns iterations
/// used; `x` is updated in place starting from its current value.
int minres(const BlockOperator& op, const Vec& b, const Vec& minv, Vec& x, double tol, int budget) {
    Vec r1 = b - op.apply(x);
    Vec y = minv.cwiseProduct(r1);
    const double beta1 = std::sqrt(std::max(0.0, r1.dot(y)));
    if (beta1 == 0.0) return 0;

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    const int n = static_cast<int>(b.size());
    Vec w = Vec::Zero(n), w1(n), w2 = Vec::Zero(n), r2 = r1, v(n);
    int it = 0;
    while (it < budget) {
        ++it;
        v = y / beta;
        y = op.apply(v);
        if (it >= 2) y -= (beta / oldb) * r1;
        const double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1 = r2;
        r2 = y;
        y = minv.cwiseProduct(r2);
        oldb = beta;
        beta = std::sqrt(std::max(0.0, r2.dot(y)));
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::hypot(gbar, beta);
        gamma = std::max(gamma, std::numeric_limits<double>::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        w1 = w2;
        w2 = w;
        w = (v - oldeps * w1 - delta * w2) / gamma;
        x += phi * w;
        if (phibar <= tol * beta1 || beta == 0.0) break;
    }
    return it;
}

/// Sparse LU on the block system with one pinned unknown per kernel vector
/// (row and column replaced by the identity), followed by iterative
/// refinement against the unpinned operator.
SaddleSolution solve_direct(const BlockOperator& op, const Vec& rhs, const std::vector<Vec>& vkernel,
                            const std::vector<Vec>& pkernel, double tol) {
    const int nu = op.nu, np = op.np;
    const int n = nu + np;
    std::vector<char> pinned(n, 0);
    auto pin = [&](const Vec& k, int offset) {
        int best = -1;
        for (int i = 0; i < k.size(); ++i)
            if (!pinned[offset + i] && (best < 0 || std::abs(k(i)) > std::abs(k(best)))) best = i;
        if (best >= 0) pinned[offset + best] = 1;
    };
    for (const Vec& k : vkernel) pin(k, 0);
    for (const Vec& k : pkernel) pin(k, nu);

    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](const Csr& m, int r0, int c0, double s, bool transpose) {
        for (int i = 0; i < m.outerSize(); ++i)
            for (Csr::InnerIterator it(m, i); it; ++it) {
                int r = r0 + static_cast<int>(it.row()), c = c0 + static_cast<int>(it.col());
                if (transpose) {
                    r = r0 + static_cast<int>(it.col());
                    c = c0 + static_cast<int>(it.row());
                }
                if (pinned[r] || pinned[c]) continue;
                trip.emplace_back(r, c, s * it.value());
            }
    };
    add(op.A.csr(), 0, 0, 1.0, false);
    add(op.B.csr(), 0, nu, -1.0, true);
    add(op.B.csr(), nu, 0, -1.0, false);
    add(op.C.csr(), nu, nu, -1.0, false);
    for (int i = 0; i < n; ++i)
        if (pinned[i]) trip.emplace_back(i, i, 1.0);
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw NoConvergence("sparse LU factorization failed", 0, 1.0);

    auto solve_pinned = [&](const Vec& r) {
        Vec rp = r;
        for (int i = 0; i < n; ++i)
            if (pinned[i]) rp(i) = 0.0;
        return Vec(lu.solve(rp));
    };
    const double bnorm = rhs.norm();
    Vec x = solve_pinned(rhs);
    double rel = (rhs - op.apply(x)).norm() / bnorm;
    int steps = 1;
    for (; steps < 6 && rel > 0.01 * tol; ++steps) {
        const Vec r = rhs - op.apply(x);
        const Vec candidate = x + solve_pinned(r);
        const double rel_new = (rhs - op.apply(candidate)).norm() / bnorm;
        if (!(rel_new < rel)) break;
        x = candidate;
        rel = rel_new;
    }
    return {x.head(nu), x.tail(np), {steps, rel}};
}

} // namespace

SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& Bdiv, const SparseMatrix& C, const Vec& f,
                            const Vec& g, double tol, const SaddleOptions& options) {
    check_tolerance(tol);
    const int nu = A.rows(), np = C.rows();
    const auto vbasis = orthonormalize(options.velocity_kernel);
    const auto pbasis = orthonormalize(options.pressure_kernel);

    Vec b(nu + np);
    b.head(nu) = project_out(f, vbasis);
    b.tail(np) = project_out(g, pbasis);
    const double bnorm = b.norm();

    SaddleSolution sol;
    if (bnorm == 0.0) {
        sol.u = Vec::Zero(nu);
        sol.p = Vec::Zero(np);
        return sol;
    }
    const BlockOperator op{A, Bdiv, C, nu, np};

    if (options.method == SaddleMethod::Direct) {
        sol = solve_direct(op, b, vbasis, pbasis, tol);
    } else {
        // block-diagonal SPD preconditioner: diag(A) and an approximate Schur
        // complement diagonal sum_j Bdiv_ij^2 / A_jj + C_ii
        const Vec ainv = safe_inverse(A.diagonal());
        Vec schur = C.diagonal();
        const Csr& bc = Bdiv.csr();
        for (int i = 0; i < bc.outerSize(); ++i)
            for (Csr::InnerIterator it(bc, i); it; ++it) schur(i) += it.value() * it.value() * ainv(it.col());
        Vec minv(nu + np);
        minv.head(nu) = ainv;
        minv.tail(np) = safe_inverse(schur);

        const int budget = options.max_iterations > 0 ? options.max_iterations : default_iteration_budget(nu + np);
        Vec x = Vec::Zero(nu + np);
        int used = 0;
        double rel = 1.0;
        for (int restart = 0; restart < 50 && used < budget; ++restart) {
            // the MINRES estimate is in the preconditioner norm; aim below tol
            // and confirm with the Euclidean residual
            used += minres(op, b, minv, x, 0.1 * tol, budget - used);
            rel = (b - op.apply(x)).norm() / bnorm;
            if (rel <= tol) break;
        }
        if (!(rel <= tol)) throw NoConvergence("MINRES did not converge", used, rel);
        sol.u = x.head(nu);
        sol.p = x.tail(np);
        sol.stats = {used, rel};
    }

    sol.u = project_out(sol.u, vbasis);
    sol.p = project_out(sol.p, pbasis);
    Vec x(nu + np);
    x << sol.u, sol.p;
    sol.stats.relative_residual = (b - op.apply(x)).norm() / bnorm;
    if (!(sol.stats.relative_residual <= tol))
        throw NoConvergence("saddle-point solve missed its tolerance", sol.stats.iterations,
                            sol.stats.relative_residual);
    return sol;
}

} // namespace maghom::fem
