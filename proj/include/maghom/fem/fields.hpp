#pragma once

#include "maghom/grid.hpp"
#include "maghom/tensor.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace maghom::fem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Values attached to every (element, quadrature point) pair.
template <class T>
class QuadratureField {
public:
    QuadratureField() = default;
    QuadratureField(int num_elements, int qp_per_element, const T& init)
        : qp_(qp_per_element), values_(static_cast<std::size_t>(num_elements) * qp_per_element, init) {}

    int qp_per_element() const noexcept { return qp_; }
    int num_elements() const noexcept { return qp_ == 0 ? 0 : static_cast<int>(values_.size()) / qp_; }
    T& at(int e, int q) noexcept { return values_[static_cast<std::size_t>(e) * qp_ + q]; }
    const T& at(int e, int q) const noexcept { return values_[static_cast<std::size_t>(e) * qp_ + q]; }

private:
    int qp_ = 0;
    std::vector<T> values_;
};

using TensorQuadField = QuadratureField<Mat3>;
using VectorQuadField = QuadratureField<Vec3>;

/// Nodal Q1 scalar field keyed by compact DOF node.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(std::shared_ptr<const PeriodicMesh> mesh, Vec values);

    const PeriodicMesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const PeriodicMesh>& mesh_ptr() const noexcept { return mesh_; }
    const Vec& values() const noexcept { return values_; }
    Vec& values() noexcept { return values_; }

    /// Elements on which the field is identically zero (pressure on solid).
    void set_zero_elements(std::vector<char> mask) { zero_elements_ = std::move(mask); }
    bool zero_on(int e) const noexcept {
        return (!zero_elements_.empty() && zero_elements_[e]) || (!element_block_.empty() && element_block_[e] < 0);
    }

    /// Piecewise-continuous layout: value index = node * blocks + element_block[e];
    /// elements with block -1 carry zero.
    void set_blocks(std::vector<int> element_block, int blocks);
    int blocks() const noexcept { return blocks_; }
    const std::vector<int>& element_blocks() const noexcept { return element_block_; }

    double value(int e, const Point& ref) const;
    Vec3 gradient(int e, const Point& ref) const;
    double value_at(const Point& x) const;
    Vec3 gradient_at(const Point& x) const;

private:
    std::shared_ptr<const PeriodicMesh> mesh_;
    Vec values_;
    std::vector<char> zero_elements_;
    std::vector<int> element_block_;
    int blocks_ = 1;

    int index(int e, int a) const;
};

/// Nodal Q1 vector field; entry dof_node * d + component.
class VectorField {
public:
    VectorField() = default;
    VectorField(std::shared_ptr<const PeriodicMesh> mesh, Vec values);

    const PeriodicMesh& mesh() const noexcept { return *mesh_; }
    const Vec& values() const noexcept { return values_; }
    Vec& values() noexcept { return values_; }

    Vec3 value(int e, const Point& ref) const;
    /// (i, k) = d u_i / d x_k
    Mat3 gradient(int e, const Point& ref) const;
    Mat3 strain(int e, const Point& ref) const;
    Vec3 value_at(const Point& x) const;
    Mat3 strain_at(const Point& x) const;

private:
    std::shared_ptr<const PeriodicMesh> mesh_;
    Vec values_;
};

} // namespace maghom::fem
