#include "maghom/fem/fields.hpp"

#include "maghom/fem/q1.hpp"

namespace maghom::fem {

ScalarField::ScalarField(std::shared_ptr<const PeriodicMesh> mesh, Vec values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {}

void ScalarField::set_blocks(std::vector<int> element_block, int blocks) {
    element_block_ = std::move(element_block);
    blocks_ = blocks;
}

int ScalarField::index(int e, int a) const {
    const int node = mesh_->dof_node(mesh_->element_node(e, a));
    return element_block_.empty() ? node : node * blocks_ + element_block_[e];
}

double ScalarField::value(int e, const Point& ref) const {
    if (zero_on(e)) return 0.0;
    const auto& m = *mesh_;
    double v = 0.0;
    for (int a = 0; a < m.nodes_per_element(); ++a)
        v += values_(index(e, a)) * Q1Element::shape_at(m.dim(), ref, a);
    return v;
}

Vec3 ScalarField::gradient(int e, const Point& ref) const {
    Vec3 g = Vec3::Zero();
    if (zero_on(e)) return g;
    const auto& m = *mesh_;
    const Point h{m.h(0), m.h(1), m.h(2)};
    for (int a = 0; a < m.nodes_per_element(); ++a) {
        const double v = values_(index(e, a));
        for (int k = 0; k < m.dim(); ++k) g(k) += v * Q1Element::grad_at(m.dim(), h, ref, a, k);
    }
    return g;
}

double ScalarField::value_at(const Point& x) const {
    Point ref;
    const int e = mesh_->locate(x, ref);
    return value(e, ref);
}

Vec3 ScalarField::gradient_at(const Point& x) const {
    Point ref;
    const int e = mesh_->locate(x, ref);
    return gradient(e, ref);
}

VectorField::VectorField(std::shared_ptr<const PeriodicMesh> mesh, Vec values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {}

Vec3 VectorField::value(int e, const Point& ref) const {
    const auto& m = *mesh_;
    const int d = m.dim();
    Vec3 v = Vec3::Zero();
    for (int a = 0; a < m.nodes_per_element(); ++a) {
        const int node = m.dof_node(m.element_node(e, a));
        const double s = Q1Element::shape_at(d, ref, a);
        for (int i = 0; i < d; ++i) v(i) += values_(node * d + i) * s;
    }
    return v;
}

Mat3 VectorField::gradient(int e, const Point& ref) const {
    const auto& m = *mesh_;
    const int d = m.dim();
    const Point h{m.h(0), m.h(1), m.h(2)};
    Mat3 g = Mat3::Zero();
    for (int a = 0; a < m.nodes_per_element(); ++a) {
        const int node = m.dof_node(m.element_node(e, a));
        for (int k = 0; k < d; ++k) {
            const double dn = Q1Element::grad_at(d, h, ref, a, k);
            for (int i = 0; i < d; ++i) g(i, k) += values_(node * d + i) * dn;
        }
    }
    return g;
}

Mat3 VectorField::strain(int e, const Point& ref) const {
    const Mat3 g = gradient(e, ref);
    return 0.5 * (g + g.transpose());
}

Vec3 VectorField::value_at(const Point& x) const {
    Point ref;
    const int e = mesh_->locate(x, ref);
    return value(e, ref);
}

Mat3 VectorField::strain_at(const Point& x) const {
    Point ref;
    const int e = mesh_->locate(x, ref);
    return strain(e, ref);
}

} // namespace maghom::fem
