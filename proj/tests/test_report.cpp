#include "maghom/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace maghom;

namespace {

dns::CorrectorReport synthetic(const std::vector<double>& pot, const std::vector<double>& ab) {
    dns::CorrectorReport r;
    r.tol = 1e-8;
    for (std::size_t k = 0; k < pot.size(); ++k) {
        dns::CorrectorEntry e;
        e.eps = 1.0 / (2 << k);
        e.cells_per_unit = 2 << k;
        e.potential = pot[k];
        e.potential_ablation = ab[k];
        e.velocity = pot[k] / 10.0;
        e.stress_gap_l1 = pot[k];
        e.velocity_h1 = 1.0;
        e.pressure_l2 = 0.5 + 0.1 * k;
        e.energy_defect = 1e-10;
        r.entries.push_back(e);
    }
    return r;
}

} // namespace

TEST_CASE("Legendre-Hadamard minimum of the symmetric identity is one half") {
    for (int d : {2, 3}) {
        const double m = report::legendre_hadamard_min(Tensor4::symmetric_identity(d));
        // (1 + (z.eta)^2) / 2 over unit pairs
        CHECK(m >= 0.5 - 1e-12);
        CHECK(m <= 0.51);
    }
    Tensor4 neg = Tensor4::symmetric_identity(2);
    neg(0, 0, 0, 0) = -2.0;
    CHECK(report::legendre_hadamard_min(neg) < 0.0);
    CHECK(report::legendre_hadamard_min(neg, 1000, 7) == report::legendre_hadamard_min(neg, 1000, 7));
}

TEST_CASE("corrector verdicts") {
    SUBCASE("clean decay") {
        const auto v = report::judge(synthetic({1.0, 0.5, 0.25}, {1.0, 0.9, 0.8}));
        CHECK(v.potential_decreasing);
        CHECK(v.velocity_decreasing);
        CHECK(v.ablation_stalls);
        CHECK(v.stress_gap_decreasing);
        CHECK(v.apriori_bounded);
        CHECK(v.energy_identity);
        CHECK(v.min_potential_ratio == doctest::Approx(2.0));
        CHECK(v.ablation_fraction == doctest::Approx(0.8));
    }
    SUBCASE("slow decay fails the ratio") {
        const auto v = report::judge(synthetic({1.0, 0.9, 0.8}, {1.0, 0.3, 0.2}));
        CHECK_FALSE(v.potential_decreasing);
        CHECK(v.stress_gap_decreasing);
        CHECK_FALSE(v.ablation_stalls);
    }
    SUBCASE("energy defect above ten tolerances") {
        auto r = synthetic({1.0, 0.5}, {1.0, 1.0});
        r.entries[1].energy_defect = 2e-7;
        CHECK_FALSE(report::judge(r).energy_identity);
    }
    SUBCASE("single entry decides nothing") {
        const auto v = report::judge(synthetic({1.0}, {1.0}));
        CHECK_FALSE(v.potential_decreasing);
    }
}

TEST_CASE("corrector CSV has one row per eps") {
    const std::string csv = report::corrector_csv(synthetic({1.0, 0.5}, {1.0, 1.0}), "h");
    std::istringstream in(csv);
    std::string l;
    std::getline(in, l);
    CHECK(l == "# config_hash: h");
    std::getline(in, l);
    CHECK(l.rfind("eps,potential,potential_ablation,velocity", 0) == 0);
    int rows = 0;
    while (std::getline(in, l)) ++rows;
    CHECK(rows == 2);
    const auto j = report::corrector_json(synthetic({1.0, 0.5}, {1.0, 1.0}));
    CHECK(j["entries"].size() == 2);
    CHECK(j["verdict"]["potential_decreasing"] == true);
}

TEST_CASE("conventions are recorded") {
    const auto c = report::conventions_json();
    CHECK(c.contains("momentum"));
    CHECK(c.contains("velocity_corrector"));
    CHECK(c.contains("thresholds"));
}
