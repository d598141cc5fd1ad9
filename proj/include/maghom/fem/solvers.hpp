#pragma once

#include "maghom/fem/sparse.hpp"

#include <vector>

namespace maghom::fem {

struct SolveStats {
    int iterations = 0;
    /// Euclidean |b - A x| / |b| of the final iterate.
    double relative_residual = 0.0;
};

struct SpdOptions {
    /// 0 selects the default budget max(10000, 50 sqrt(N)).
    int max_iterations = 0;
    /// Known null-space vectors (quotient spaces); they are projected out of
    /// the right-hand side and of the returned solution.
    std::vector<Vec> kernel;
};

/// Jacobi-preconditioned conjugate gradients. Deterministic; throws
/// NoConvergence with the last residual when the budget is exhausted.
Vec solve_spd(const SparseMatrix& A, const Vec& b, double tol, const SpdOptions& options = {},
              SolveStats* stats = nullptr);

enum class SaddleMethod { Minres, Direct };

struct SaddleOptions {
    int max_iterations = 0;
    std::vector<Vec> velocity_kernel;
    std::vector<Vec> pressure_kernel;
    SaddleMethod method = SaddleMethod::Minres;
};

struct SaddleSolution {
    Vec u;
    Vec p;
    SolveStats stats;
};

/// Solves the symmetric indefinite system
///   [ A      -Bdiv^T ] [u]   [f]
///   [ -Bdiv  -C      ] [p] = [g]
/// with block-diagonal preconditioned MINRES (or a sparse LU on the system
/// bordered by the kernel constraints).
SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& Bdiv, const SparseMatrix& C, const Vec& f,
                            const Vec& g, double tol, const SaddleOptions& options = {});

/// Euclidean projection onto the orthogonal complement of `kernel`.
Vec project_out(const Vec& x, const std::vector<Vec>& kernel);

int default_iteration_budget(int unknowns);

} // namespace maghom::fem
