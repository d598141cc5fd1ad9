#include "maghom/io.hpp"

#include "maghom/error.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace maghom::io {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xf]);
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

void write_json(const std::string& path, const nlohmann::json& value) { write_text(path, value.dump(2) + "\n"); }

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string tensors_csv(const cell::EffectiveTensors& t, const std::string& hash) {
    const int d = t.dim;
    std::ostringstream out;
    out << "# config_hash: " << hash << "\n";
    out << "tensor,i,j,m,n,value\n";
    auto row = [&](const char* name, int i, int j, int m, int n, double v) {
        out << name << ',' << i << ',' << j << ',' << m << ',' << n << ',' << format_double(v) << '\n';
    };
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) row("mu_eff", i + 1, j + 1, 0, 0, t.mu_eff(i, j));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) row("N", i + 1, j + 1, m + 1, n + 1, t.N(i, j, m, n));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) row("B", i + 1, j + 1, m + 1, n + 1, t.B[i * d + j](m, n));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) row("B_sym", i + 1, j + 1, m + 1, n + 1, t.B_sym[i * d + j](m, n));
    return out.str();
}

namespace {

std::array<int, 3> lattice_dims(const PeriodicMesh& m) {
    std::array<int, 3> dims{1, 1, 1};
    for (int k = 0; k < m.dim(); ++k) dims[k] = m.resolution() + 1;
    return dims;
}

template <class Fn>
void for_each_lattice_node(const PeriodicMesh& m, Fn&& fn) {
    const auto dims = lattice_dims(m);
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) fn(m.node_at({i, j, k}));
}

template <class Field, class T, class Eval>
std::vector<T> average_at_nodes(const Field& f, T zero, Eval&& eval) {
    const PeriodicMesh& m = f.mesh();
    std::vector<T> sum(m.num_nodes(), zero);
    std::vector<int> count(m.num_nodes(), 0);
    for (int e = 0; e < m.num_elements(); ++e) {
        for (int a = 0; a < m.nodes_per_element(); ++a) {
            Point ref{0.0, 0.0, 0.0};
            for (int k = 0; k < m.dim(); ++k) ref[k] = (a >> k) & 1;
            const auto value = eval(e, ref);
            if (!value) continue;
            const int node = m.element_node(e, a);
            sum[node] += *value;
            ++count[node];
        }
    }
    for (int node = 0; node < m.num_nodes(); ++node)
        if (count[node] > 0) sum[node] /= count[node];
    return sum;
}

void write_scalar_block(std::ostringstream& out, const std::string& name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) out << format_double(x) << '\n';
}

} // namespace

std::vector<double> nodal_values(const fem::ScalarField& f) {
    return average_at_nodes(f, 0.0, [&](int e, const Point& ref) -> std::optional<double> {
        if (f.zero_on(e)) return std::nullopt;
        return f.value(e, ref);
    });
}

std::vector<fem::Vec3> nodal_values(const fem::VectorField& f) {
    return average_at_nodes(f, fem::Vec3(fem::Vec3::Zero()),
                            [&](int e, const Point& ref) -> std::optional<fem::Vec3> { return f.value(e, ref); });
}

std::vector<fem::Mat3> element_average(const fem::TensorQuadField& f) {
    std::vector<fem::Mat3> out(f.num_elements(), fem::Mat3::Zero());
    const int nq = f.qp_per_element();
    for (int e = 0; e < f.num_elements(); ++e) {
        for (int q = 0; q < nq; ++q) out[e] += f.at(e, q);
        out[e] /= nq;
    }
    return out;
}

std::string vtk_structured(const PeriodicMesh& m, const std::string& title, const std::vector<VtkPointScalar>& scalars,
                           const std::vector<VtkPointVector>& vectors, const std::vector<VtkCellTensor>& tensors,
                           const std::vector<VtkPointScalar>& cell_scalars) {
    const auto dims = lattice_dims(m);
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << '\n';
    out << "ORIGIN 0 0 0\n";
    out << "SPACING " << format_double(m.h(0)) << ' ' << format_double(m.h(1)) << ' '
        << format_double(m.dim() == 3 ? m.h(2) : 1.0) << '\n';

    const int npts = dims[0] * dims[1] * dims[2];
    if (!scalars.empty() || !vectors.empty()) {
        out << "POINT_DATA " << npts << '\n';
        for (const auto& s : scalars) {
            std::vector<double> ordered;
            ordered.reserve(npts);
            for_each_lattice_node(m, [&](int node) { ordered.push_back(s.values[node]); });
            write_scalar_block(out, s.name, ordered);
        }
        for (const auto& v : vectors) {
            out << "VECTORS " << v.name << " double\n";
            for_each_lattice_node(m, [&](int node) {
                const auto& x = v.values[node];
                out << format_double(x(0)) << ' ' << format_double(x(1)) << ' ' << format_double(x(2)) << '\n';
            });
        }
    }
    if (!tensors.empty() || !cell_scalars.empty()) {
        out << "CELL_DATA " << m.num_elements() << '\n';
        std::vector<int> order;
        order.reserve(m.num_elements());
        std::array<int, 3> ed{1, 1, 1};
        for (int k = 0; k < m.dim(); ++k) ed[k] = m.resolution();
        for (int k = 0; k < ed[2]; ++k)
            for (int j = 0; j < ed[1]; ++j)
                for (int i = 0; i < ed[0]; ++i) order.push_back(m.element_at({i, j, k}));
        for (const auto& s : cell_scalars) {
            std::vector<double> ordered;
            for (int e : order) ordered.push_back(s.values[e]);
            write_scalar_block(out, s.name, ordered);
        }
        for (const auto& t : tensors) {
            out << "TENSORS " << t.name << " double\n";
            for (int e : order) {
                const auto& a = t.values[e];
                for (int r = 0; r < 3; ++r)
                    out << format_double(a(r, 0)) << ' ' << format_double(a(r, 1)) << ' ' << format_double(a(r, 2))
                        << '\n';
            }
        }
    }
    return out.str();
}

} // namespace maghom::io
