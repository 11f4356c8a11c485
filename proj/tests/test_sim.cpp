#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "climhjb/simulate.hpp"

using namespace climhjb;

namespace {

ModelParams params() {
    ModelParams p;
    p.finalize(3, 2);
    return p;
}

/// Analytic stand-in for a solved pre-jump value function: log K plus a
/// smooth dependence on the other coordinates, with enough curvature to give
/// interesting yet well-behaved policies.
class SyntheticField : public ValueField {
public:
    explicit SyntheticField(const ModelParams& p) : p_(p) {}
    ValueEval eval(const State& s) const override {
        ValueEval e;
        e.has_kappa = s.jump.has_kappa();
        e.v = value(s);
        e.v_k = 1.0;
        e.v_r = 0.12 - 0.1 * s.r;
        e.v_y = -0.06 * s.y_hat;
        e.v_x = e.has_kappa ? 0.08 : 0.0;
        e.v_kk = 0.0;
        e.v_rr = -0.1;
        e.v_yy = -0.06;
        e.v_xx = 0.0;
        e.v_kr = 0.0;
        return e;
    }
    double value(const State& s) const override {
        return s.log_k + 0.12 * s.r - 0.05 * s.r * s.r - 0.03 * s.y_hat * s.y_hat +
               (s.jump.has_kappa() ? 0.08 * s.log_kappa : 0.0) + 1.0;
    }

private:
    const ModelParams& p_;
};

PathwayInputs synthetic_inputs(const SyntheticField& f, const ModelParams& p) {
    PathwayInputs in;
    in.field = &f;
    in.tech_value = [&f](const State& s) { return f.value(s) + 0.35; };
    in.damage_value = [&f, &p](const State& s) {
        // worse realized curvature costs more value
        return f.value(s) - 0.15 - 0.6 * gamma3_effective(p.climate, s.jump);
    };
    return in;
}

State initial_state() {
    State s;
    s.log_k = std::log(739.0);
    s.r = 0.5;
    s.y_hat = 1.1;
    s.log_kappa = std::log(11.2);
    s.jump = JumpState::pre_both();
    return s;
}

}  // namespace

TEST_CASE("an all-green economy emits almost nothing along the whole path") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    State init = initial_state();

    State green = init;
    green.r = 0.99;
    Trajectory tg =
        simulate(in, green, UncertaintyConfig::neutral(), 10.0, 1.0 / 12, p);
    // emissions scale with 1 - R: a 99% green economy stays within ~1% of the
    // all-dirty flow at the same capital stock
    for (std::size_t i = 0; i < tg.size(); ++i) {
        const State& s = tg.states[i];
        double all_dirty = p.climate.eta * p.econ.A_d * std::exp(s.log_k);
        CHECK(tg.emissions_gtc[i] <= 0.015 * all_dirty);
    }
    double all_dirty0 = p.climate.eta * p.econ.A_d * 739.0;
    CHECK(tg.emissions_gtc[0] == doctest::Approx(0.01 * all_dirty0).epsilon(1e-10));
}

TEST_CASE("halving the step barely moves the year-30 state") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    UncertaintyConfig xi = UncertaintyConfig::climate_and_jumps(Xi::make(0.1));

    Trajectory a = simulate(in, initial_state(), xi, 30.0, 1.0 / 12, p);
    Trajectory b = simulate(in, initial_state(), xi, 30.0, 1.0 / 24, p);
    const State& sa = a.states.back();
    const State& sb = b.states.back();
    CHECK(std::abs(sa.log_k - sb.log_k) / std::abs(sb.log_k) < 1e-6);
    CHECK(std::abs(sa.r - sb.r) / std::abs(sb.r) < 1e-6);
    CHECK(std::abs(sa.y_hat - sb.y_hat) / std::abs(sb.y_hat) < 1e-6);
    CHECK(std::abs(sa.log_kappa - sb.log_kappa) / std::abs(sb.log_kappa) < 1e-6);
}

TEST_CASE("baseline damage-jump probability is zero below the threshold") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    Trajectory t =
        simulate(in, initial_state(), UncertaintyConfig::neutral(), 25.0, 1.0 / 12, p);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.states[i].y_hat < p.climate.y_lower) {
            CHECK(t.p_damage_base[i] == 0.0);
            CHECK(t.p_damage_distorted[i] == 0.0);
        }
        CHECK(t.p_tech_base[i] >= 0.0);
        CHECK(t.p_tech_base[i] <= 1.0);
        if (i) CHECK(t.p_tech_base[i] >= t.p_tech_base[i - 1]);
        CHECK(t.states[i].r > 0.0);
        CHECK(t.states[i].r < 1.0);
        if (i) CHECK(t.time[i] > t.time[i - 1]);
    }
}

TEST_CASE("trajectory CSV round-trips bit-exactly") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    UncertaintyConfig xi = UncertaintyConfig::climate_and_jumps(Xi::make(0.1));
    Trajectory t = simulate(in, initial_state(), xi, 5.0, 1.0 / 12, p);

    const std::string path = "test_traj_roundtrip.csv";
    t.to_csv(path);
    Trajectory r = Trajectory::from_csv(path);
    REQUIRE(r.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(r.time[i] == t.time[i]);
        CHECK(r.states[i].log_k == t.states[i].log_k);
        CHECK(r.states[i].r == t.states[i].r);
        CHECK(r.states[i].y_hat == t.states[i].y_hat);
        CHECK(r.states[i].log_kappa == t.states[i].log_kappa);
        CHECK(r.controls[i].i_d == t.controls[i].i_d);
        CHECK(r.controls[i].i_kappa == t.controls[i].i_kappa);
        CHECK(r.consumption[i] == t.consumption[i]);
        CHECK(r.emissions_gtc[i] == t.emissions_gtc[i]);
        CHECK(r.rd_output_ratio[i] == t.rd_output_ratio[i]);
        CHECK(r.p_tech_distorted[i] == t.p_tech_distorted[i]);
        CHECK(r.p_damage_distorted[i] == t.p_damage_distorted[i]);
        CHECK(r.valuations[i].scc == t.valuations[i].scc);
        CHECK(r.valuations[i].svr == t.valuations[i].svr);
    }
    std::remove(path.c_str());
}

TEST_CASE("damage-model histogram") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);

    SUBCASE("neutral returns the priors exactly") {
        Trajectory t = simulate(in, initial_state(), UncertaintyConfig::neutral(), 12.0,
                                1.0 / 12, p);
        auto w = distorted_damage_histogram(t, 12.0, p);
        REQUIRE(w.size() == p.climate.pi_damage.size());
        for (std::size_t m = 0; m < w.size(); ++m)
            CHECK(w[m] == doctest::Approx(p.climate.pi_damage[m]).epsilon(1e-14));
    }

    SUBCASE("two models with unit tilts keep their priors") {
        ModelParams p2;
        p2.climate.gamma_3 = {0.1, 0.2};
        p2.climate.pi_damage = {0.3, 0.7};
        p2.finalize(2, 2);
        SyntheticField f2(p2);
        PathwayInputs in2 = synthetic_inputs(f2, p2);
        Trajectory t = simulate(in2, initial_state(), UncertaintyConfig::neutral(), 4.0,
                                1.0 / 12, p2);
        auto w = distorted_damage_histogram(t, 4.0, p2);
        CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-14));
        CHECK(w[1] == doctest::Approx(0.7).epsilon(1e-14));
    }

    SUBCASE("an averse planner shifts weight toward worse damages") {
        UncertaintyConfig xi = UncertaintyConfig::climate_and_jumps(Xi::make(0.1));
        Trajectory t = simulate(in, initial_state(), xi, 12.0, 1.0 / 12, p);
        auto w = distorted_damage_histogram(t, 12.0, p);
        double prior_mean = 0, dist_mean = 0;
        for (std::size_t m = 0; m < w.size(); ++m) {
            prior_mean += p.climate.pi_damage[m] * p.climate.gamma_3[m];
            dist_mean += w[m] * p.climate.gamma_3[m];
        }
        CHECK(dist_mean > prior_mean);
    }
}

TEST_CASE("climate-model histogram") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    UncertaintyConfig xi = UncertaintyConfig::climate_and_jumps(Xi::make(0.1));
    Trajectory t = simulate(in, initial_state(), xi, 12.0, 1.0 / 12, p);

    SUBCASE("neutral penalty returns the priors") {
        BetaEnsemble e = synthetic_beta_ensemble(12);
        auto w = distorted_climate_histogram(t, 12.0, e, Xi::make_neutral(), p);
        CHECK(w == e.prior);
    }

    SUBCASE("identical sensitivities cancel the tilt") {
        BetaEnsemble e;
        e.beta = {1.86, 1.86, 1.86};
        e.prior = {0.2, 0.5, 0.3};
        auto w = distorted_climate_histogram(t, 12.0, e, Xi::make(0.1), p);
        for (int l = 0; l < 3; ++l) CHECK(w[l] == doctest::Approx(e.prior[l]).epsilon(1e-12));
    }

    SUBCASE("a negative damage-adjusted temperature value favors high sensitivity") {
        // v_y - slope < 0 along this synthetic path, so big-beta models gain
        BetaEnsemble e;
        e.beta = {1.0, 3.0};
        e.prior = {0.5, 0.5};
        auto w = distorted_climate_histogram(t, 12.0, e, Xi::make(0.1), p);
        CHECK(w[1] > 0.5);
        CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("empty ensembles are rejected") {
        BetaEnsemble e;
        CHECK_THROWS_AS(distorted_climate_histogram(t, 12.0, e, Xi::make(0.1), p),
                        SolveError);
    }
}

TEST_CASE("leaving the solved box is reported with the exit time") {
    ModelParams p = params();
    SyntheticField f(p);
    PathwayInputs in = synthetic_inputs(f, p);
    Domain tiny;
    tiny.hi[2] = 1.2;  // the temperature passes 1.2 within a few years
    try {
        simulate(in, initial_state(), UncertaintyConfig::neutral(), 40.0, 1.0 / 12, p,
                 tiny);
        FAIL("expected a box-exit error");
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("year") != std::string::npos);
    }
}
