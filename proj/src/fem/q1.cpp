#include "maghom/fem/q1.hpp"

#include <cmath>
#include <stdexcept>

namespace maghom::fem {

void gauss_rule(int points, std::vector<double>& nodes, std::vector<double>& weights) {
    switch (points) {
    case 1:
        nodes = {0.5};
        weights = {1.0};
        return;
    case 2: {
        const double s = 0.5 / std::sqrt(3.0);
        nodes = {0.5 - s, 0.5 + s};
        weights = {0.5, 0.5};
        return;
    }
    case 3: {
        const double s = 0.5 * std::sqrt(0.6);
        nodes = {0.5 - s, 0.5, 0.5 + s};
        weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return;
    }
    default: throw std::invalid_argument("unsupported Gauss rule size");
    }
}

double Q1Element::shape_at(int dim, const Point& ref, int a) noexcept {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= ((a >> k) & 1) ? ref[k] : 1.0 - ref[k];
    return v;
}

double Q1Element::grad_at(int dim, const Point& h, const Point& ref, int a, int k) noexcept {
    double v = ((a >> k) & 1) ? 1.0 / h[k] : -1.0 / h[k];
    for (int l = 0; l < dim; ++l) {
        if (l == k) continue;
        v *= ((a >> l) & 1) ? ref[l] : 1.0 - ref[l];
    }
    return v;
}

Q1Element::Q1Element(int dim, const Point& h, int gauss_per_axis)
    : dim_(dim), num_nodes_(1 << dim), h_(h) {
    std::vector<double> nodes, w1;
    gauss_rule(gauss_per_axis, nodes, w1);
    double volume = 1.0;
    for (int k = 0; k < dim; ++k) volume *= h[k];

    int total = 1;
    for (int k = 0; k < dim; ++k) total *= gauss_per_axis;
    for (int q = 0; q < total; ++q) {
        Point p{0.0, 0.0, 0.0};
        double w = volume;
        int rem = q;
        for (int k = 0; k < dim; ++k) {
            const int idx = rem % gauss_per_axis;
            rem /= gauss_per_axis;
            p[k] = nodes[idx];
            w *= w1[idx];
        }
        points_.push_back(p);
        weights_.push_back(w);
    }
    shape_.resize(total * num_nodes_);
    grad_.assign(total * num_nodes_ * 3, 0.0);
    for (int q = 0; q < total; ++q)
        for (int a = 0; a < num_nodes_; ++a) {
            shape_[q * num_nodes_ + a] = shape_at(dim, points_[q], a);
            for (int k = 0; k < dim; ++k) grad_[(q * num_nodes_ + a) * 3 + k] = grad_at(dim, h, points_[q], a, k);
        }
}

Mat Q1Element::stiffness(const Mat& coefficient) const {
    Mat K = Mat::Zero(num_nodes_, num_nodes_);
    for (int q = 0; q < num_qp(); ++q)
        for (int a = 0; a < num_nodes_; ++a)
            for (int b = 0; b < num_nodes_; ++b) {
                double s = 0.0;
                for (int k = 0; k < dim_; ++k)
                    for (int l = 0; l < dim_; ++l) s += grad(q, a, k) * coefficient(k, l) * grad(q, b, l);
                K(a, b) += weight(q) * s;
            }
    return K;
}

Mat Q1Element::mass() const {
    Mat M = Mat::Zero(num_nodes_, num_nodes_);
    for (int q = 0; q < num_qp(); ++q)
        for (int a = 0; a < num_nodes_; ++a)
            for (int b = 0; b < num_nodes_; ++b) M(a, b) += weight(q) * shape(q, a) * shape(q, b);
    return M;
}

Vec Q1Element::load() const {
    Vec f = Vec::Zero(num_nodes_);
    for (int q = 0; q < num_qp(); ++q)
        for (int a = 0; a < num_nodes_; ++a) f(a) += weight(q) * shape(q, a);
    return f;
}

Mat Q1Element::viscous(const Tensor4& tensor) const {
    const int d = dim_;
    const int n = num_nodes_ * d;
    Mat K = Mat::Zero(n, n);
    // strain of basis function (a, i): E_kl = (delta_ik dN_a/dx_l + delta_il dN_a/dx_k) / 2
    auto strain = [&](int q, int a, int i, Mat& e) {
        e.setZero(d, d);
        for (int l = 0; l < d; ++l) {
            e(i, l) += 0.5 * grad(q, a, l);
            e(l, i) += 0.5 * grad(q, a, l);
        }
    };
    Mat eu, ev;
    for (int q = 0; q < num_qp(); ++q)
        for (int a = 0; a < num_nodes_; ++a)
            for (int i = 0; i < d; ++i) {
                strain(q, a, i, eu);
                const Mat s = tensor.contract(eu);
                for (int b = 0; b < num_nodes_; ++b)
                    for (int j = 0; j < d; ++j) {
                        strain(q, b, j, ev);
                        K(b * d + j, a * d + i) += weight(q) * (s.array() * ev.array()).sum();
                    }
            }
    return K;
}

Mat Q1Element::divergence() const {
    const int d = dim_;
    Mat B = Mat::Zero(num_nodes_, num_nodes_ * d);
    for (int q = 0; q < num_qp(); ++q)
        for (int a = 0; a < num_nodes_; ++a)
            for (int b = 0; b < num_nodes_; ++b)
                for (int j = 0; j < d; ++j) B(a, b * d + j) += weight(q) * shape(q, a) * grad(q, b, j);
    return B;
}

} // namespace maghom::fem
