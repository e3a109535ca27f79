#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "disctk/discs.hpp"
#include "fixtures.hpp"

using namespace disctk;

TEST_CASE("constrained disc bookkeeping round trip") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int order : {0, 1, 3}) {
        std::vector<cplx> core;
        for (int j = 0; j < 5; ++j) core.emplace_back(g(rng), g(rng));
        ConstrainedDisc d(order, core);
        ConstrainedDisc back = ConstrainedDisc::from_laurent(d.to_laurent(), order);
        REQUIRE(back.core().size() == core.size());
        for (size_t j = 0; j < core.size(); ++j)
            CHECK(std::abs(back.core()[j] - core[j]) < 1e-13);
        cplx zeta(0.3, 0.7);
        cplx pre = std::pow(1.0 - zeta, order);
        cplx pv = 0.0;
        for (size_t j = core.size(); j-- > 0;) pv = pv * zeta + core[j];
        CHECK(std::abs(d.eval(zeta) - pre * pv) < 1e-13);
    }
    // Not divisible: (1 - zeta) does not divide 1.
    CHECK_THROWS_AS(ConstrainedDisc::from_laurent(LaurentPoly::constant(1.0), 1),
                    std::invalid_argument);
}

TEST_CASE("constrained disc derivatives at one") {
    // f = (1-z)^2 (2 + 3z): f' = -2(1-z)(2+3z) + 3(1-z)^2, f''(1) = 2(2+3.1*... )
    ConstrainedDisc d(2, {cplx(2.0), cplx(3.0)});
    CHECK(std::abs(d.derivative_at_one(0)) < 1e-15);
    CHECK(std::abs(d.derivative_at_one(1)) < 1e-15);
    // f'' at 1: Leibniz gives binom(2,2) * 2! * (-1)^2 * p(1) = 2 * 5.
    CHECK(std::abs(d.derivative_at_one(2) - cplx(10.0)) < 1e-13);
    // f''' at 1: binom(3,2) * 2 * p'(1) = 3 * 2 * 3 = 18.
    CHECK(std::abs(d.derivative_at_one(3) - cplx(18.0)) < 1e-13);

    // Cross-check against numerical differentiation of eval.
    double h = 1e-5;
    cplx fd2 = (d.eval(1.0 + h) - 2.0 * d.eval(1.0) + d.eval(1.0 - h)) / (h * h);
    CHECK(std::abs(fd2 - d.derivative_at_one(2)) < 1e-4);
}

TEST_CASE("sphere initial lift matches the hand computation") {
    Lift L = initial_lift(fixtures::sphere(), fixtures::pair11());
    // h = 1 - zeta, g = 2 - 2 zeta, h~ = 1 - zeta, g~ = zeta / 2.
    BoundaryGrid grid(32);
    for (int j = 0; j < grid.size(); ++j) {
        cplx zeta = grid.point(j);
        CHECK(std::abs(L.h[0].eval(zeta) - (1.0 - zeta)) < 1e-13);
        CHECK(std::abs(L.g[0].eval(zeta) - (2.0 - 2.0 * zeta)) < 1e-13);
        CHECK(std::abs(L.ht[0].eval(zeta) - (1.0 - zeta)) < 1e-13);
        CHECK(std::abs(L.gt[0].eval(zeta) - 0.5 * zeta) < 1e-13);
    }
    CHECK(L.h[0].order() == 1);
    CHECK(L.ht[0].order() == 1);  // D1 - 1
    CHECK(L.gt[0].order() == 0);
    CHECK(std::abs(L.g[0].eval(1.0)) < 1e-14);
}

TEST_CASE("initial lift rejects degenerate pairs") {
    CHECK_THROWS_AS(initial_lift(fixtures::sphere(), {{0.0}, {cplx(1.0)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(initial_lift(fixtures::sphere(), {{1.0}, {cplx(0.0)}}),
                    std::invalid_argument);
}

TEST_CASE("initial lift is stationary") {
    struct Case {
        Model m;
        CandidatePair p;
    };
    std::vector<Case> cases;
    cases.push_back({fixtures::sphere(), fixtures::pair11()});
    cases.push_back({fixtures::quartic(1.0 / 3.0), fixtures::pair11()});
    // A nonadmissible pair still yields a stationary lift.
    cases.push_back({fixtures::quartic(1.0), fixtures::pair11()});
    cases.push_back(
        {fixtures::two_norm_powers(4, 6), {{1.0, 0.25}, {cplx(1.0), cplx(0.5, 0.5)}}});

    for (const auto& c : cases) {
        Lift L = initial_lift(c.m, c.p);
        LiftedDefiningSystem sys(c.m);
        auto rep = verify_stationary(sys, L, c.m.k0(), BoundaryGrid(1024));
        INFO("attachment " << rep.attachment.max_violation << " conormal "
                           << rep.conormal.max_violation << " holo "
                           << rep.holomorphy.max_violation << " nonvanish "
                           << rep.nonvanishing.max_violation);
        CHECK(rep.pass);
    }
}

TEST_CASE("stationarity respects positive rescaling of c") {
    auto m = fixtures::quartic(0.25);
    CandidatePair p{{3.5}, {cplx(1.0)}};
    Lift L = initial_lift(m, p);
    auto rep = verify_stationary(LiftedDefiningSystem(m), L, m.k0(), BoundaryGrid(1024));
    CHECK(rep.pass);
}

TEST_CASE("verify_stationary flags broken lifts") {
    auto m = fixtures::sphere();
    LiftedDefiningSystem sys(m);

    // Wrong power in g~: zeta^2 / 2 fails the reality equation.
    Lift bad = initial_lift(m, fixtures::pair11());
    bad.gt[0] = ConstrainedDisc(0, {cplx(0.0), cplx(0.0), cplx(0.5)});
    auto rep = verify_stationary(sys, bad, m.k0(), BoundaryGrid(256));
    CHECK(!rep.conormal.pass);
    CHECK(!rep.pass);

    // Constant base disc rejected.
    Lift flat = initial_lift(m, fixtures::pair11());
    flat.h[0] = ConstrainedDisc(1, {});
    flat.g[0] = ConstrainedDisc(1, {});
    auto rep2 = verify_stationary(sys, flat, m.k0(), BoundaryGrid(256));
    CHECK(!rep2.nonconstant);
    CHECK(!rep2.pass);
}
