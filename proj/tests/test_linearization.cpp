#include <catch2/catch_amalgamated.hpp>

#include "disctk/linearization.hpp"
#include "fixtures.hpp"

using namespace disctk;

TEST_CASE("sphere G entries in closed form") {
    auto op = assemble_G(fixtures::sphere(), fixtures::pair11());
    REQUIRE(op.dim() == 4);
    auto entry = [&](int r, int c) { return op.G.at(r, c); };
    cplx I(0.0, 1.0);
    LaurentPoly one_minus = LaurentPoly::constant(1.0).times_one_minus_zeta(1);

    CHECK((entry(0, 0) - LaurentPoly::constant(0.5)).coeff_norm() < 1e-14);
    CHECK((entry(0, 1) + one_minus).coeff_norm() < 1e-14);  // -P_zbar = -(1-zeta)
    CHECK((entry(1, 1) - LaurentPoly::monomial(1, 1.0)).coeff_norm() < 1e-14);
    CHECK((entry(1, 2) - LaurentPoly::constant(1.0)).coeff_norm() < 1e-14);
    CHECK((entry(1, 3) - one_minus.scaled(2.0)).coeff_norm() < 1e-14);
    CHECK((entry(2, 1) - LaurentPoly::monomial(1, I)).coeff_norm() < 1e-14);
    CHECK((entry(2, 2) + LaurentPoly::constant(I)).coeff_norm() < 1e-14);
    CHECK((entry(3, 3) + LaurentPoly::monomial(1, I)).coeff_norm() < 1e-14);
    // Lower-left blocks vanish.
    CHECK(entry(1, 0).is_zero());
    CHECK(entry(3, 0).is_zero());
    CHECK(entry(3, 1).is_zero());
}

TEST_CASE("quadric G couples w-rows to z through the A V column") {
    // Real symmetric A: the w-row z-entries are -(1-zeta) (A V)_i.
    std::vector<std::vector<std::vector<cplx>>> As{{
        {cplx(2.0), cplx(0.5)},
        {cplx(0.5), cplx(1.0)},
    }};
    auto m = fixtures::quadric(2, As);
    CandidatePair p{{1.0}, {cplx(1.0), cplx(0.5, -0.5)}};
    auto op = assemble_G(m, p);
    for (int i = 0; i < 2; ++i) {
        cplx av = As[0][0][i] * p.V[0] + As[0][1][i] * p.V[1];
        LaurentPoly want =
            LaurentPoly::constant(-av).times_one_minus_zeta(1);
        CHECK((op.G.at(0, 1 + i) - want).coeff_norm() < 1e-13);
    }
}

TEST_CASE("assemble_G passes its own finite-difference audit on the quartic") {
    CHECK_NOTHROW(assemble_G(fixtures::quartic(1.0 / 3.0), fixtures::pair11()));
}

TEST_CASE("maslov index of the full symbol") {
    auto sphere_op = assemble_G(fixtures::sphere(), fixtures::pair11());
    CHECK(maslov_index(sphere_op, BoundaryGrid(1024)) == 4);  // ind + 2 d k0
    auto quartic_op = assemble_G(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    CHECK(maslov_index(quartic_op, BoundaryGrid(1024)) == 14);
}

TEST_CASE("reduced symbol and the determinant identity") {
    auto op = assemble_G(fixtures::sphere(), fixtures::pair11());
    LaurentMatrix gt2 = op.gtilde2();
    // det G~2 = 2 i zeta.
    CHECK((gt2.det() - LaurentPoly::monomial(1, cplx(0.0, 2.0))).coeff_norm() < 1e-13);
    CHECK_NOTHROW(reduced_symbol(op, BoundaryGrid(64)));

    auto quartic_op = assemble_G(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    CHECK_NOTHROW(reduced_symbol(quartic_op, BoundaryGrid(4096)));

    // Non-admissible symbol: roots of det Q on the circle.
    auto bad = assemble_G(fixtures::quartic(1.0), fixtures::pair11());
    CHECK_THROWS_AS(reduced_symbol(bad, BoundaryGrid(4096)), std::runtime_error);
}

TEST_CASE("partial indices") {
    auto sphere_op = assemble_G(fixtures::sphere(), fixtures::pair11());
    auto pi = partial_indices(sphere_op);
    REQUIRE(pi.conclusive);
    CHECK(pi.indices == std::vector<int>{1, 1});
    CHECK(pi.sum == 2);

    auto quartic_op = assemble_G(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    auto pq = partial_indices(quartic_op);
    REQUIRE(pq.conclusive);
    CHECK(pq.sum == 8);
    REQUIRE(pq.indices.size() == 2);
    CHECK(pq.indices.front() >= 3);  // min kappa >= D1 - 1
}

TEST_CASE("kernel nullity equals the dimension formula") {
    auto sphere_op = assemble_G(fixtures::sphere(), fixtures::pair11());
    auto rep = kernel(sphere_op, 5);
    REQUIRE(rep.conclusive);
    CHECK(rep.nullity == 5);
    CHECK(rep.match);
    CHECK(rep.gap >= 1e4);
    REQUIRE(rep.basis.size() == 5);

    // Each basis element solves the linearized problem on a finer grid.
    BoundaryGrid fine(512);
    for (const auto& b : rep.basis) {
        double worst = 0.0;
        for (int j = 0; j < fine.size(); ++j)
            worst = std::max(
                worst, linearized_residual(sphere_op, b, fine.point(j)).cwiseAbs().maxCoeff());
        CHECK(worst < 1e-8);
    }

    auto pinned = sphere_op;
    pinned.pinned = true;
    auto prep = kernel(pinned, 5);
    REQUIRE(prep.conclusive);
    CHECK(prep.nullity == 4);
    CHECK(prep.match);
}

TEST_CASE("kernel nullity on the quartic") {
    auto op = assemble_G(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    auto rep = kernel(op, 11);
    REQUIRE(rep.conclusive);
    CHECK(rep.nullity == 11);
    CHECK(rep.match);
}

TEST_CASE("kernel nullity on an n = 2 quadric") {
    std::vector<std::vector<std::vector<cplx>>> As{{
        {cplx(2.0), cplx(0.0, 1.0)},
        {cplx(0.0, -1.0), cplx(1.0)},
    }};
    auto m = fixtures::quadric(2, As);
    CandidatePair p{{1.0}, {cplx(1.0), cplx(0.3, 0.4)}};
    auto op = assemble_G(m, p);
    // ind = 2n = 4, m = 4 + 1 * 3 - 0 = 7.
    auto rep = kernel(op, 7);
    REQUIRE(rep.conclusive);
    CHECK(rep.nullity == 7);
    CHECK(rep.match);
}
