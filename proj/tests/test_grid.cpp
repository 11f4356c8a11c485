#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "climhjb/grid.hpp"

using namespace climhjb;

namespace {

GridField make_field(const GridSpec& g, double (*fn)(double, double, double)) {
    GridField f(g, JumpState::post_both(0, 0), "testhash", "neutral");
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k)
                f.at(i, j, k) = fn(g.coord(0, i), g.coord(1, j), g.coord(2, k));
    return f;
}

}  // namespace

TEST_CASE("multilinear interpolation is exact on multilinear functions") {
    GridSpec g;
    g.n = {9, 9, 9};
    GridField f = make_field(
        g, [](double a, double b, double c) { return 2 * a - 3 * b + c + a * b; });
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        double a = rng.uniform(g.lo[0], g.hi[0]);
        double b = rng.uniform(g.lo[1], g.hi[1]);
        double c = rng.uniform(g.lo[2], g.hi[2]);
        CHECK(f.interp(a, b, c) ==
              doctest::Approx(2 * a - 3 * b + c + a * b).epsilon(1e-12));
    }
    CHECK_THROWS_AS(f.interp(g.lo[0] - 0.5, 0.5, 1.0), SolveError);
}

TEST_CASE("derivatives: constant and linear fields") {
    GridSpec g;
    g.n = {10, 10, 10};
    GridField cst = make_field(g, [](double, double, double) { return 4.2; });
    ValueEval e = cst.derivatives_at(5.0, 0.4, 1.2);
    CHECK(e.v == doctest::Approx(4.2));
    CHECK(e.v_k == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.v_kk == doctest::Approx(0.0).epsilon(1e-12));

    GridField lin =
        make_field(g, [](double a, double, double) { return 3.0 * a + 1.0; });
    for (double r : {0.01, 0.4, 0.99}) {
        ValueEval el = lin.derivatives_at(4.8, r, 2.0);
        CHECK(el.v_k == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(std::abs(el.v_kk) < 1e-10);
        CHECK(std::abs(el.v_kr) < 1e-10);
    }
}

TEST_CASE("derivatives: quadratic field is reproduced exactly") {
    GridSpec g;
    g.n = {12, 11, 10};
    auto fn = [](double a, double b, double c) {
        return 0.5 * a * a - b * b + 2 * c * c + a * b - 0.3 * a * c + 7;
    };
    GridField f = make_field(g, fn);
    // include boundary-adjacent and interior points
    const double pts[][3] = {{4.0, 0.01, 0.0}, {8.5, 0.99, 4.0}, {6.1, 0.47, 2.3},
                             {4.2, 0.9, 0.1}};
    for (auto& q : pts) {
        ValueEval e = f.derivatives_at(q[0], q[1], q[2]);
        CHECK(e.v_kk == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(e.v_rr == doctest::Approx(-2.0).epsilon(1e-10));
        CHECK(e.v_yy == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(e.v_kr == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(e.v_k == doctest::Approx(q[0] + q[1] - 0.3 * q[2]).epsilon(1e-9));
    }
}

TEST_CASE("grid refinement keeps every coarse node") {
    GridSpec g;
    g.n = {9, 8, 10};
    GridSpec fine = g.refined();
    CHECK(fine.n[0] == 17);
    for (int d = 0; d < 3; ++d) {
        for (int i = 0; i < g.n[d]; ++i)
            CHECK(fine.coord(d, 2 * i) == doctest::Approx(g.coord(d, i)).epsilon(1e-14));
    }
}

TEST_CASE("field files reload bit-exactly") {
    GridSpec g;
    g.n = {8, 8, 8};
    GridField f(g, JumpState::post_tech(2), "cafebabe01234567", "0.1");
    Rng rng(13);
    for (double& v : f.values()) v = rng.uniform(-10, 10);

    std::string path = "test_field_roundtrip.bin";
    f.save(path);
    GridField f2 = GridField::load(path);
    CHECK(f2.spec() == f.spec());
    CHECK(f2.jump().phase == f.jump().phase);
    CHECK(f2.jump().j == 2);
    CHECK(f2.param_hash() == "cafebabe01234567");
    CHECK(f2.xi_tag() == "0.1");
    REQUIRE(f2.values().size() == f.values().size());
    for (std::size_t i = 0; i < f.values().size(); ++i)
        CHECK(f2.values()[i] == f.values()[i]);  // bitwise
    std::remove(path.c_str());
}

TEST_CASE("grid spec validation") {
    GridSpec g;
    g.n = {7, 10, 10};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.n = {10, 10, 10};
    g.lo[1] = g.hi[1];
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
