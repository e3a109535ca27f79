#include <catch2/catch_amalgamated.hpp>

#include "disctk/admissibility.hpp"
#include "fixtures.hpp"

using namespace disctk;

TEST_CASE("quadric Q is zeta times the coefficient matrix, S vanishes") {
    std::vector<std::vector<std::vector<cplx>>> As{{
        {cplx(2.0), cplx(0.0, 1.0)},
        {cplx(0.0, -1.0), cplx(1.0)},
    }};
    auto m = fixtures::quadric(2, As);
    CandidatePair p{{1.0}, {cplx(1.0), cplx(0.5, -0.5)}};
    QSPair qs = build_QS(m, p);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            LaurentPoly want = LaurentPoly::monomial(1, As[0][i][j]);
            CHECK((qs.Q.at(i, j) - want).coeff_norm() < 1e-13);
            CHECK(qs.S.at(i, j).coeff_norm() < 1e-13);
        }
}

TEST_CASE("quartic Q11 closed form") {
    double t = 0.4;
    auto m = fixtures::quartic(t);
    QSPair qs = build_QS(m, fixtures::pair11());
    // zeta^3 (3t - 4 zeta + 3t zeta^2)
    LaurentPoly want;
    want.add(3, 3 * t);
    want.add(4, -4.0);
    want.add(5, 3 * t);
    CHECK((qs.Q.at(0, 0) - want).coeff_norm() < 1e-12);

    // Pointwise identity (1 - zetabar)^{D1-2} Q = zeta^{k0} sum c P_{z zbar}
    // on the circle away from zeta = 1.
    LaurentPoly raw = m.component(0).dz_dzbar(0, 0).restrict_to_ray({cplx(1.0)});
    BoundaryGrid grid(64);
    for (int j = 1; j < grid.size(); ++j) {
        cplx zeta = grid.point(j);
        cplx lhs = std::pow(1.0 - std::conj(zeta), 2) * qs.Q.at(0, 0).eval(zeta);
        cplx rhs = LaurentPoly::ipow(zeta, 3) * raw.eval(zeta);
        CHECK(std::abs(lhs - rhs) < 1e-11 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("two-norm-powers model Q is diagonal with the printed entry") {
    auto m = fixtures::two_norm_powers(4, 6);  // k0 = 3
    CandidatePair p{{1.0, 0.5}, {cplx(1.0), cplx(1.0)}};
    QSPair qs = build_QS(m, p);
    CHECK(qs.Q.at(0, 1).coeff_norm() < 1e-13);
    CHECK(qs.Q.at(1, 0).coeff_norm() < 1e-13);
    // c1 (D1/2)^2 (-1)^{D1/2-1} zeta^{k0+D1/2-1}
    //   + c2 (D2/2)^2 (-1)^{D2/2-1} (1-zetabar)^{D2-D1} zeta^{k0+D2/2-1}
    // = -4 c1 zeta^4 + 9 c2 zeta^3 (1-zeta)^2.
    LaurentPoly want = LaurentPoly::monomial(4, -4.0 * p.c[0]) +
                       LaurentPoly::monomial(3, 9.0 * p.c[1]).times_one_minus_zeta(2);
    CHECK((qs.Q.at(0, 0) - want).coeff_norm() < 1e-12);
    CHECK((qs.Q.at(1, 1) - want).coeff_norm() < 1e-12);

    CandidatePair e1{{1.0, 0.0}, {cplx(1.0), cplx(1.0)}};
    CandidatePair e2{{0.0, 1.0}, {cplx(1.0), cplx(1.0)}};
    CHECK(check_admissible(m, e1).verdict);
    auto rep = check_admissible(m, e2);
    CHECK(!rep.verdict);
    // Singular at zeta = 1; the double root caps the attainable accuracy.
    CHECK(rep.nearest_root_dist < 1e-3);
}

TEST_CASE("quartic admissibility threshold") {
    CHECK(check_admissible(fixtures::quartic(1.0 / 3.0), fixtures::pair11()).verdict);
    CHECK(check_admissible(fixtures::quartic(0.1), fixtures::pair11()).verdict);
    auto at_threshold = check_admissible(fixtures::quartic(2.0 / 3.0), fixtures::pair11());
    CHECK(!at_threshold.verdict);
    CHECK(at_threshold.nearest_root_dist < 1e-6);
    CHECK(!check_admissible(fixtures::quartic(1.0), fixtures::pair11()).verdict);

    // c = 0 makes Q identically zero.
    CandidatePair czero{{0.0}, {cplx(1.0)}};
    CHECK(check_admissible(fixtures::quartic(0.3), czero).identically_singular);
}

TEST_CASE("admissibility verdict is scale covariant") {
    for (double t : {1.0 / 3.0, 0.9}) {
        auto m = fixtures::quartic(t);
        CandidatePair base = fixtures::pair11();
        CandidatePair scaled{{-2.5}, {cplx(0.7, -0.3)}};
        CHECK(check_admissible(m, base).verdict == check_admissible(m, scaled).verdict);
    }
}

TEST_CASE("index report") {
    auto sphere = index_report(fixtures::sphere(), fixtures::pair11());
    CHECK(sphere.wind_detQ == 1);
    CHECK(sphere.ind == 2);
    CHECK(sphere.maslov == 4);
    CHECK(sphere.m == 5);
    CHECK(sphere.pinned == 4);

    auto quartic = index_report(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    CHECK(quartic.wind_detQ == 4);
    CHECK(quartic.ind == 8);
    CHECK(quartic.maslov == 14);
    CHECK(quartic.m == 11);
    CHECK(quartic.pinned == 10);

    // Quadric with invertible sum c_l A_l: ind = 2n.
    std::vector<std::vector<std::vector<cplx>>> As{{
        {cplx(2.0), cplx(0.0, 1.0)},
        {cplx(0.0, -1.0), cplx(1.0)},
    }};
    auto quadric =
        index_report(fixtures::quadric(2, As), {{1.0}, {cplx(1.0), cplx(0.0)}});
    CHECK(quadric.ind == 4);

    CHECK_THROWS_AS(index_report(fixtures::quartic(0.9), fixtures::pair11()),
                    std::invalid_argument);
}

TEST_CASE("pair search") {
    auto sphere_hits = search_pairs(fixtures::sphere(), 16, 42);
    REQUIRE(!sphere_hits.empty());
    for (const auto& h : sphere_hits) CHECK(h.admissible);

    auto dec_hits = search_pairs(fixtures::decoupled(), 16, 42);
    REQUIRE(!dec_hits.empty());
    CHECK(dec_hits.front().score < 1e-6);
    for (const auto& h : dec_hits) CHECK(!h.admissible);

    auto tn_hits = search_pairs(fixtures::two_norm_powers(4, 6), 24, 42);
    REQUIRE(!tn_hits.empty());
    CHECK(tn_hits.front().admissible);
    // Determinism.
    auto tn_again = search_pairs(fixtures::two_norm_powers(4, 6), 24, 42);
    CHECK(tn_again.front().score == tn_hits.front().score);
}
