#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "climhjb/hjb.hpp"
#include "climhjb/valuation.hpp"

using namespace climhjb;

namespace {

ModelParams params() {
    ModelParams p;
    p.finalize(4, 3);
    return p;
}

State base_state() {
    State s;
    s.log_k = std::log(739.0);
    s.r = 0.5;
    s.y_hat = 1.1;
    s.log_kappa = std::log(11.2);
    s.jump = JumpState::pre_both();
    return s;
}

}  // namespace

TEST_CASE("carbon price vanishes when marginal values track the damage curve") {
    ModelParams p = params();
    State s = base_state();
    ValueEval e;
    e.v_k = 1.0;
    e.v_r = 0.0;
    e.v_y = p.climate.gamma_1 + p.climate.gamma_2 * s.y_hat;
    e.v_yy = p.climate.gamma_2;
    e.v_x = 0.2;
    Controls c{0.02, 0.02, 0.005};
    Valuations v = social_valuations(s, e, c, p);
    CHECK(v.scc == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v.svg > 0.0);
    CHECK(v.svd > 0.0);
}

TEST_CASE("symmetric sectors price green and dirty capital identically") {
    ModelParams p = params();
    State s = base_state();
    ValueEval e;
    e.v_k = 1.2;
    e.v_r = 0.0;
    e.v_y = -0.4;
    e.v_yy = -0.1;
    e.v_x = 0.1;
    Controls c{0.03, 0.03, 0.004};
    Valuations v = social_valuations(s, e, c, p);
    CHECK(v.svg == doctest::Approx(v.svd).epsilon(1e-14));
}

TEST_CASE("valuations match an independently coded expression set") {
    ModelParams p = params();
    auto reference = [&p](const State& s, const ValueEval& e, const Controls& c) {
        const double cons = consumption(s, c, p);
        const double scale = cons / p.econ.delta;
        const double em = p.climate.eta * p.econ.A_d * (1 - s.r) * std::exp(s.log_k);
        const double vs2 = p.climate.varsigma * p.climate.varsigma;
        Valuations v;
        v.scc = 1000 * p.climate.eta * scale *
                (-(p.climate.beta_f * e.v_y) - vs2 * em * e.v_yy +
                 p.climate.beta_f * (p.climate.gamma_1 + p.climate.gamma_2 * s.y_hat) +
                 p.climate.gamma_2 * vs2 * em);
        v.svr = c.i_kappa > 0
                    ? scale * p.econ.psi_0 * p.econ.psi_1 *
                          std::pow(c.i_kappa, p.econ.psi_1 - 1) *
                          std::exp(p.econ.psi_1 * (s.log_k - s.log_kappa)) * e.v_x
                    : 0.0;
        v.svg = scale * p.econ.Gamma_g * p.econ.theta_g *
                (e.v_k + (1 - s.r) * e.v_r) / (1 + p.econ.theta_g * c.i_g);
        v.svd = scale * p.econ.Gamma_d * p.econ.theta_d * (e.v_k - s.r * e.v_r) /
                (1 + p.econ.theta_d * c.i_d);
        return v;
    };

    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        State s;
        s.log_k = rng.uniform(4, 8.5);
        s.r = rng.uniform(0.05, 0.95);
        s.y_hat = rng.uniform(0, 4);
        s.log_kappa = rng.uniform(1, 6);
        s.jump = JumpState::pre_both();
        ValueEval e;
        e.v_k = rng.uniform(0.5, 2);
        e.v_r = rng.uniform(-0.3, 0.3);
        e.v_y = rng.uniform(-3, 1);
        e.v_yy = rng.uniform(-1, 1);
        e.v_x = rng.uniform(0.01, 0.5);
        Controls c{rng.uniform(0, 0.08), rng.uniform(0, 0.08), rng.uniform(0.0, 0.01)};
        Valuations a = social_valuations(s, e, c, p);
        Valuations b = reference(s, e, c);
        CHECK(a.scc == doctest::Approx(b.scc).epsilon(1e-12));
        CHECK(a.svr == doctest::Approx(b.svr).epsilon(1e-12));
        CHECK(a.svg == doctest::Approx(b.svg).epsilon(1e-12));
        CHECK(a.svd == doctest::Approx(b.svd).epsilon(1e-12));
    }
}

TEST_CASE("all four prices scale together with the consumption numeraire") {
    // doubling consumption (via cheaper investment) doubles 1/MUC and thus
    // every valuation computed from the same marginal expressions
    ModelParams p = params();
    State s = base_state();
    ValueEval e;
    e.v_k = 1.0;
    e.v_r = 0.1;
    e.v_y = -0.5;
    e.v_yy = -0.2;
    e.v_x = 0.15;
    Controls c{0.02, 0.02, 0.004};
    Valuations a = social_valuations(s, e, c, p);

    ModelParams p2 = p;
    p2.econ.A_d *= 2.0;
    p2.econ.A_g *= 2.0;  // same state, double gross output
    Controls c2 = c;
    double cons1 = consumption(s, c, p);
    double cons2 = consumption(s, c2, p2);
    Valuations b = social_valuations(s, e, c2, p2);
    const double k = cons2 / cons1;
    // SCC picks up an extra emission-flow factor; the capital prices scale
    // exactly with the numeraire
    CHECK(b.svg == doctest::Approx(k * a.svg).epsilon(1e-12));
    CHECK(b.svd == doctest::Approx(k * a.svd).epsilon(1e-12));
    CHECK(b.svr == doctest::Approx(k * a.svr).epsilon(1e-12));
}

TEST_CASE("positive carbon price under pessimistic temperature values") {
    ModelParams p = params();
    Rng rng(37);
    for (int t = 0; t < 200; ++t) {
        State s;
        s.log_k = rng.uniform(4, 8.5);
        s.r = rng.uniform(0.05, 0.95);
        s.y_hat = rng.uniform(0, 4);
        s.log_kappa = rng.uniform(1, 6);
        s.jump = JumpState::pre_both();
        ValueEval e;
        e.v_k = 1.0;
        double slope = p.climate.gamma_1 + p.climate.gamma_2 * s.y_hat;
        e.v_y = slope - rng.uniform(0.01, 2.0);   // below the damage slope
        e.v_yy = p.climate.gamma_2 - rng.uniform(0.0, 1.0);
        e.v_x = 0.1;
        Controls c{0.01, 0.01, 0.002};
        Valuations v = social_valuations(s, e, c, p);
        CHECK(v.scc > 0.0);
    }
}

TEST_CASE("nonpositive consumption is rejected") {
    ModelParams p = params();
    State s = base_state();
    ValueEval e;
    e.v_k = 1.0;
    Controls c{p.econ.A_d, p.econ.A_g, 0.5};
    CHECK_THROWS_AS(social_valuations(s, e, c, p), SolveError);
}
