#pragma once

#include "maghom/tensor.hpp"

#include <Eigen/Sparse>

namespace maghom::fem {

using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplets = std::vector<Eigen::Triplet<double, int>>;

/// Compressed-sparse-row matrix with a symmetry flag. Matrices flagged
/// symmetric are checked on construction: |A - A^T|_max <= 1e-12 |A|_max.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(Csr data, bool symmetric);
    static SparseMatrix from_triplets(int rows, int cols, const Triplets& triplets, bool symmetric);

    const Csr& csr() const noexcept { return data_; }
    int rows() const noexcept { return static_cast<int>(data_.rows()); }
    int cols() const noexcept { return static_cast<int>(data_.cols()); }
    bool symmetric() const noexcept { return symmetric_; }

    double max_abs() const;
    /// |A - A^T|_max / |A|_max (0 for the zero matrix).
    double symmetry_defect() const;

    Vec operator*(const Vec& x) const { return data_ * x; }
    Vec diagonal() const { return data_.diagonal(); }

private:
    Csr data_;
    bool symmetric_ = false;
};

} // namespace maghom::fem
