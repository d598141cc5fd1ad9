#include "maghom/cell.hpp"
#include "maghom/dns.hpp"
#include "maghom/error.hpp"
#include "maghom/macro.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace maghom;
using fem::Mat3;
using fem::Vec3;

namespace {

dns::DnsConfig base_config(const GeometrySpec& g) {
    dns::DnsConfig c;
    c.geometry = g;
    c.flow.S = 1.0;
    c.flow.g = Vec3(0.0, 1.0, 0.0);
    c.flow.k.vector = Vec3(1.0, 0.0, 0.0);
    c.flow.tol = 1e-10;
    c.elements_per_cell = 8;
    return c;
}

dns::CorrectorReport study(const GeometrySpec& g, const std::vector<int>& ms, int npc) {
    auto cfg = base_config(g);
    cfg.elements_per_cell = npc;
    auto r = cell::run_cell_problems(2, npc, g);
    macro::MacroConfig mc = cfg.flow;
    mc.n = ms.back() * npc;
    const auto state = std::make_shared<const macro::MacroState>(macro::solve_macro(r.tensors, mc));
    const auto cells = std::make_shared<const cell::CellSolutionSet>(std::move(r.cells));
    return dns::corrector_study(ms, cfg, cells, state);
}

} // namespace

TEST_CASE("DNS mesh follows eps and rejects under-resolution") {
    const auto m = dns::build_dns_mesh(2, {1.0, 1.0, 1.0}, 4, 8);
    CHECK(m->resolution() == 32);
    CHECK(dns::build_dns_mesh(2, {2.0, 2.0, 1.0}, 2, 8)->resolution() == 32);
    CHECK_THROWS_AS(dns::build_dns_mesh(2, {1.0, 1.0, 1.0}, 4, 4), UnderResolved);
    CHECK_THROWS_AS(dns::build_dns_mesh(2, {1.0, 2.0, 1.0}, 4, 8), InvalidGeometry);
    CHECK_THROWS_AS(dns::build_dns_mesh(2, {1.5, 1.5, 1.0}, 3, 8), InvalidGeometry);
}

TEST_CASE("pointwise Maxwell stress") {
    const Mat3 t = dns::maxwell_stress_at(Vec3(1.0, 2.0, 0.0), 2.0, 3.0, 2);
    // S mu (g g^T - |g|^2 I / 2) with |g|^2 = 5
    CHECK(t(0, 0) == doctest::Approx(-9.0));
    CHECK(t(1, 1) == doctest::Approx(9.0));
    CHECK(t(0, 1) == doctest::Approx(12.0));
    CHECK(t(1, 0) == doctest::Approx(12.0));
    CHECK(std::abs(t.trace()) < 1e-12);
}

TEST_CASE("basket functions") {
    CHECK(dns::basket_function(0, {0.75, 0.1, 0}) == doctest::Approx(0.25));
    CHECK(dns::basket_function(2, {0.5, 0.5, 0}) == doctest::Approx(1.0));
    CHECK(dns::basket_function(3, {0.0, 1.0, 0}) == doctest::Approx(-1.0));
    CHECK(dns::basket_function(4, {0.5, 0.5, 0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("uniform medium without particles has vanishing correctors") {
    const auto rep = study(GeometrySpec{}, {2, 4}, 8);
    for (const auto& e : rep.entries) {
        CHECK(e.potential <= 1e-7);
        CHECK(e.potential_ablation <= 1e-7);
        CHECK(e.velocity <= 1e-7);
        CHECK(e.velocity_ablation <= 1e-7);
        CHECK(e.stress_gap_l1 <= 1e-7);
        CHECK(e.stress_gap_l2 <= 1e-7);
        for (double w : e.weak_pressure) CHECK(std::abs(w) <= 1e-7);
    }
}

TEST_CASE("layered potential corrector decreases along eps") {
    GeometrySpec g;
    g.shape = GeometrySpec::Shape::Layered;
    g.mu_primary = 1.0;
    g.mu_secondary = 3.0;
    g.axis = 1;
    const auto rep = study(g, {2, 4}, 8);
    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.entries[1].potential < rep.entries[0].potential);
    CHECK(rep.entries[1].stress_gap_l1 < rep.entries[0].stress_gap_l1);
    for (const auto& e : rep.entries) CHECK(e.energy_defect <= 10.0 * 1e-10);
}

TEST_CASE("particles move rigidly and carry no pressure") {
    GeometrySpec g;
    g.shape = GeometrySpec::Shape::Disk;
    g.radius = 0.25;
    g.mu_primary = 1.0;
    g.mu_secondary = 2.0;
    const auto cfg = base_config(g);
    const auto s = dns::solve_dns(2, 2, cfg);
    CHECK(s.material.num_particles == 4);
    CHECK(s.translation.size() == 4);
    CHECK(s.rigid_defect <= 1e-12);
    CHECK(s.energy_defect <= 10.0 * cfg.flow.tol);
    for (int e = 0; e < s.mesh->num_elements(); ++e)
        if (s.material.is_solid(e)) CHECK(s.p.zero_on(e));
    const double mean_phi = oracle::integrate(*s.mesh, 2, [&](int e, const Point& ref, const Point&) {
        return s.phi.value(e, ref);
    });
    CHECK(std::abs(mean_phi) < 1e-9);
    // mirror symmetry about x = 1/2 of the setup
    CHECK(s.translation[0](1) == doctest::Approx(s.translation[1](1)).epsilon(1e-6));
}

TEST_CASE("incompatible DNS flux is rejected") {
    auto cfg = base_config(GeometrySpec{});
    cfg.flow.k.kind = macro::FluxSpec::Kind::Affine;
    cfg.flow.k.vector = Vec3::Zero();
    cfg.flow.k.gradient = Mat3::Identity();
    CHECK_THROWS_AS(dns::solve_dns(2, 2, cfg), IncompatibleFlux);
}
