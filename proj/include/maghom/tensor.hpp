#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace maghom {

/// Small dense matrix with the spatial dimension as its runtime size. Only the
/// leading d x d block is meaningful.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Rank-4 tensor T^{ij}_{mn} in up to three dimensions, stored densely.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int dim) : dim_(dim) { data_.fill(0.0); }

    int dim() const noexcept { return dim_; }

    double& operator()(int i, int j, int m, int n) noexcept { return data_[index(i, j, m, n)]; }
    double operator()(int i, int j, int m, int n) const noexcept { return data_[index(i, j, m, n)]; }

    /// Q^{ij}:Q^{mn} = (delta_im delta_jn + delta_in delta_jm) / 2, the
    /// effective viscosity of a particle-free suspension.
    static Tensor4 symmetric_identity(int dim) {
        Tensor4 t(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int m = 0; m < dim; ++m)
                    for (int n = 0; n < dim; ++n)
                        t(i, j, m, n) = 0.5 * ((i == m && j == n ? 1.0 : 0.0) + (i == n && j == m ? 1.0 : 0.0));
        return t;
    }

    /// Stress-like contraction S_mn = T^{ij}_{mn} E_ij.
    Mat contract(const Mat& e) const {
        Mat s = Mat::Zero(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int m = 0; m < dim_; ++m)
                    for (int n = 0; n < dim_; ++n) s(m, n) += (*this)(i, j, m, n) * e(i, j);
        return s;
    }

    double max_abs_difference(const Tensor4& other) const {
        double d = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k) d = std::max(d, std::abs(data_[k] - other.data_[k]));
        return d;
    }

private:
    static constexpr int index(int i, int j, int m, int n) noexcept { return ((i * 3 + j) * 3 + m) * 3 + n; }

    int dim_ = 0;
    std::array<double, 81> data_{};
};

} // namespace maghom
