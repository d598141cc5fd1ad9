#include "maghom/fem/sparse.hpp"

#include <stdexcept>
#include <string>

namespace maghom::fem {

SparseMatrix::SparseMatrix(Csr data, bool symmetric) : data_(std::move(data)), symmetric_(symmetric) {
    data_.makeCompressed();
    if (symmetric_) {
        const double defect = symmetry_defect();
        if (defect > 1e-12)
            throw std::logic_error("matrix flagged symmetric has relative asymmetry " + std::to_string(defect));
    }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const Triplets& triplets, bool symmetric) {
    Csr m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SparseMatrix(std::move(m), symmetric);
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (int k = 0; k < data_.nonZeros(); ++k) m = std::max(m, std::abs(data_.valuePtr()[k]));
    return m;
}

double SparseMatrix::symmetry_defect() const {
    if (data_.rows() != data_.cols()) return std::numeric_limits<double>::infinity();
    const double scale = max_abs();
    if (scale == 0.0) return 0.0;
    const Csr t = data_.transpose();
    const Csr diff = data_ - t;
    double m = 0.0;
    for (int k = 0; k < diff.nonZeros(); ++k) m = std::max(m, std::abs(diff.valuePtr()[k]));
    return m / scale;
}

} // namespace maghom::fem
