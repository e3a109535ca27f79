#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "disctk/io.hpp"
#include "fixtures.hpp"

using namespace disctk;
using fixtures::mi;

TEST_CASE("model json round trip") {
    for (const Model& m : {fixtures::sphere(), fixtures::quartic(0.4),
                           fixtures::two_norm_powers(4, 6)}) {
        json j = model_to_json(m);
        CHECK(j["format"] == 1);
        Model back = model_from_json(j);
        CHECK(back.n() == m.n());
        CHECK(back.d() == m.d());
        CHECK(back.D1() == m.D1());
        CHECK(back.k0() == m.k0());
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 0.7);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<cplx> z;
            for (int i = 0; i < m.n(); ++i) z.emplace_back(g(rng), g(rng));
            for (int l = 0; l < m.d(); ++l) {
                if (m.component_is_zero(l)) {
                    CHECK(back.component_is_zero(l));
                    continue;
                }
                CHECK(std::abs(m.component(l).eval(z) - back.component(l).eval(z)) <
                      1e-12);
            }
        }
    }
}

TEST_CASE("model parsed from literal text") {
    json j = json::parse(R"({
      "format": 1, "n": 1, "d": 1,
      "components": [
        {"zero": false, "D": 2,
         "terms": [{"I": [1], "J": [1], "re": 1.0, "im": 0.0}]}
      ]
    })");
    Model m = model_from_json(j);
    CHECK(m.D1() == 2);
    CHECK(m.k0() == 1);
    CHECK(std::abs(m.component(0).eval({cplx(2.0, 1.0)}) - cplx(5.0)) < 1e-14);
}

TEST_CASE("model schema errors") {
    CHECK_THROWS_AS(model_from_json(json::parse(R"({"n": 1, "d": 1})")), IoError);
    CHECK_THROWS_AS(model_from_json(json::parse(R"({"format": 2, "n": 1, "d": 1})")),
                    IoError);
    // Wrong exponent arity.
    json j = json::parse(R"({
      "format": 1, "n": 2, "d": 1,
      "components": [{"zero": false, "D": 2,
                      "terms": [{"I": [1], "J": [1], "re": 1.0}]}]
    })");
    CHECK_THROWS_AS(model_from_json(j), IoError);
}

TEST_CASE("perturbation json") {
    auto sphere = fixtures::sphere();
    json j = json::parse(R"({
      "format": 1, "scale": 0.01,
      "components": [[
        {"I": [2], "J": [1], "S": [0],
         "coeffs": [{"A": [0], "T": [0], "re": 1.0, "im": 0.0}]}
      ]]
    })");
    Perturbation th = perturbation_from_json(sphere, j);
    CHECK(th.scale() == 0.01);
    PerturbationTerm cubic{mi({2}), mi({1}), mi({0}), {{mi({0}), mi({0}), cplx(1.0)}}};
    Perturbation want(sphere, {{cubic}}, 0.01);
    std::vector<cplx> z{cplx(0.4, -0.2)};
    std::vector<double> y{0.3};
    CHECK(std::abs(th.expand(0).eval(z, y) - want.expand(0).eval(z, y)) < 1e-14);

    // Component count mismatch.
    json short_j = json::parse(R"({"format": 1, "scale": 1.0, "components": []})");
    CHECK_THROWS_AS(perturbation_from_json(sphere, short_j), IoError);
}

TEST_CASE("lift json round trip") {
    Lift L = initial_lift(fixtures::quartic(1.0 / 3.0), fixtures::pair11());
    json j = lift_to_json(L);
    Lift back = lift_from_json(j);
    BoundaryGrid grid(32);
    for (int s = 0; s < grid.size(); ++s) {
        cplx zeta = grid.point(s);
        LiftPoint a = L.eval(zeta), b = back.eval(zeta);
        CHECK(std::abs(a.z[0] - b.z[0]) < 1e-14);
        CHECK(std::abs(a.w[0] - b.w[0]) < 1e-14);
        CHECK(std::abs(a.zt[0] - b.zt[0]) < 1e-14);
        CHECK(std::abs(a.wt[0] - b.wt[0]) < 1e-14);
    }
    CHECK(back.ht[0].order() == L.ht[0].order());
}

TEST_CASE("report serialization carries the expected keys") {
    auto m = fixtures::quartic(1.0 / 3.0);
    auto p = fixtures::pair11();
    json adm = to_json(check_admissible(m, p));
    CHECK(adm["verdict"] == true);
    CHECK(adm.contains("nearest_root_dist"));

    json idx = to_json(index_report(m, p));
    CHECK(idx["ind"] == 8);
    CHECK(idx["m"] == 11);

    auto op = assemble_G(fixtures::sphere(), p, false);
    json ker = to_json(kernel(op, 5), true);
    CHECK(ker["nullity"] == 5);
    CHECK(ker["match"] == true);
    REQUIRE(ker.contains("basis"));
    CHECK(ker["basis"].size() == 5);
    // Exported basis entries are valid lifts.
    Lift b0 = lift_from_json(ker["basis"][0]);
    CHECK(b0.h.size() == 1);

    json pi = to_json(partial_indices(op));
    CHECK(pi["conclusive"] == true);
    CHECK(pi["indices"] == json::array({1, 1}));
}

TEST_CASE("file io errors") {
    CHECK_THROWS_AS(load_json_file("/nonexistent/path.json"), IoError);
}
