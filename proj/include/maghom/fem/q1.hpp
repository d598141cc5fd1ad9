#pragma once

#include "maghom/grid.hpp"
#include "maghom/tensor.hpp"

#include <vector>

namespace maghom::fem {

/// Multilinear (Q1) shape functions on an axis-aligned element of extent h,
/// with a tensor-product Gauss rule. Meshes are uniform, so one instance
/// serves every element of a mesh.
class Q1Element {
public:
    Q1Element(int dim, const Point& h, int gauss_per_axis = 2);

    int dim() const noexcept { return dim_; }
    int num_nodes() const noexcept { return num_nodes_; }
    int num_qp() const noexcept { return static_cast<int>(weights_.size()); }
    const Point& h() const noexcept { return h_; }

    /// Reference coordinates in [0,1]^d of quadrature point q.
    const Point& qp(int q) const noexcept { return points_[q]; }
    /// Quadrature weight including the element volume.
    double weight(int q) const noexcept { return weights_[q]; }
    double shape(int q, int a) const noexcept { return shape_[q * num_nodes_ + a]; }
    /// Physical derivative d N_a / d x_k at quadrature point q.
    double grad(int q, int a, int k) const noexcept { return grad_[(q * num_nodes_ + a) * 3 + k]; }

    static double shape_at(int dim, const Point& ref, int a) noexcept;
    static double grad_at(int dim, const Point& h, const Point& ref, int a, int k) noexcept;

    // Reference element matrices (uniform meshes share them across elements).
    /// int grad N_a . M grad N_b
    Mat stiffness(const Mat& coefficient) const;
    /// int N_a N_b
    Mat mass() const;
    /// int N_a
    Vec load() const;
    /// Viscous matrix int D(v) : T : D(u), local index a*d + i.
    Mat viscous(const Tensor4& tensor) const;
    /// int q_a d_j N_b, rows pressure nodes, columns a*d + j.
    Mat divergence() const;

private:
    int dim_;
    int num_nodes_;
    Point h_;
    std::vector<Point> points_;
    std::vector<double> weights_;
    std::vector<double> shape_;
    std::vector<double> grad_;
};

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_rule(int points, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace maghom::fem
