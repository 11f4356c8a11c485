#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "climhjb/io.hpp"

using namespace climhjb;

TEST_CASE("presets carry the published calibration") {
    ModelParams p = preset_table_1_2_3();
    CHECK(p.econ.delta == 0.025);
    CHECK(p.econ.theta_d == 100.0);
    CHECK(p.econ.varrho == 448.0);
    CHECK(p.climate.beta_f == doctest::Approx(1.86e-3));
    CHECK(p.climate.gamma_2 == doctest::Approx(0.0044));
    REQUIRE(p.n_tech() == 3);
    CHECK(p.econ.a_g_post[0] == doctest::Approx(0.10));
    CHECK(p.econ.a_g_post[1] == doctest::Approx(0.15));
    CHECK(p.econ.a_g_post[2] == doctest::Approx(0.20));
    REQUIRE(p.n_damage() == 20);
    CHECK(p.climate.gamma_3.front() == 0.0);
    CHECK(p.climate.gamma_3.back() == doctest::Approx(1.0 / 3.0));
    CHECK_NOTHROW(p.validate());

    ModelParams alt = preset_appendix_alt();
    CHECK(alt.econ.delta == 0.01);
    CHECK(alt.econ.varrho == 1120.0);
    CHECK(alt.econ.a_g_post.back() == doctest::Approx(0.30));
    CHECK_NOTHROW(alt.validate());

    CHECK_THROWS_AS(preset_by_name("unknown"), ConfigError);
}

TEST_CASE("parameter validation rejects broken invariants") {
    ModelParams p = preset_table_1_2_3();
    p.econ.pi_tech[0] += 1e-6;
    CHECK_THROWS_AS(p.validate(), ConfigError);

    ModelParams q = preset_table_1_2_3();
    q.climate.gamma_3[5] = q.climate.gamma_3[4] - 0.01;
    CHECK_THROWS_AS(q.validate(), ConfigError);

    ModelParams r = preset_table_1_2_3();
    r.econ.a_g_post[0] = r.econ.A_g - 0.01;
    CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("parameter hash is stable and sensitive") {
    ModelParams a = preset_table_1_2_3();
    ModelParams b = preset_table_1_2_3();
    CHECK(a.hash() == b.hash());
    b.econ.delta = 0.0250000001;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("text configuration round-trip") {
    const char* text = R"(
# pipeline configuration
preset = table-1-2-3
seed = 11
out_dir = runs/demo
desk_scale = true

[model]
n_damage_models = 5
n_tech_models = 3
eta = 0.18

[uncertainty]
xi = 0.2
drift_channels = climate

[grid]
n = 31, 26, 21

[train]
epochs = 1234
batch = 64

[simulate]
horizon = 25
dt = 0.05
xi_list = 0.2, neutral

[init]
k0 = 700
r0 = 0.45
y0 = 1.0
kappa0 = 10.0
)";
    RunConfig c = parse_config_text(text);
    CHECK(c.seed == 11);
    CHECK(c.out_dir == "runs/demo");
    CHECK(c.desk_scale);
    CHECK(c.params.n_damage() == 5);
    CHECK(c.params.climate.eta == doctest::Approx(0.18));
    CHECK(c.xi.jump_damage.value == doctest::Approx(0.2));
    CHECK(c.xi.drift_temperature.value == doctest::Approx(0.2));
    CHECK(c.xi.drift_capital.neutral);
    CHECK(c.grid.n[0] == 31);
    CHECK(c.train.epochs == 1234);
    CHECK(c.train.batch == 64);
    CHECK(c.sim_horizon == 25.0);
    REQUIRE(c.xi_list.size() == 2);
    CHECK(c.xi_list[0].value == doctest::Approx(0.2));
    CHECK(c.xi_list[1].neutral);
    CHECK(c.initial_state.log_k == doctest::Approx(std::log(700.0)));
    CHECK(c.initial_state.r == 0.45);

    CHECK_THROWS_AS(parse_config_text("nonsense = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[uncertainty]\nxi = -0.5\n"), ConfigError);
}

TEST_CASE("json configuration uses the same schema") {
    const char* text = R"({
        "preset": "table-1-2-3",
        "seed": 3,
        "model": {"n_damage_models": 4, "eta": 0.19},
        "uncertainty": {"xi": "neutral"},
        "grid": {"n": [31, 26, 21]},
        "simulate": {"xi_list": ["0.1", "neutral"]}
    })";
    RunConfig c = parse_config_json(text);
    CHECK(c.seed == 3);
    CHECK(c.params.n_damage() == 4);
    CHECK(c.params.climate.eta == doctest::Approx(0.19));
    CHECK(c.xi.all_neutral());
    CHECK(c.grid.n[1] == 26);
    REQUIRE(c.xi_list.size() == 2);
    CHECK(c.xi_list[0].value == doctest::Approx(0.1));
}

TEST_CASE("synthetic climate ensemble has the pinned mean and round-trips") {
    BetaEnsemble e = synthetic_beta_ensemble(144);
    REQUIRE(e.size() == 144);
    double mean = 0, psum = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        mean += e.beta[i] * e.prior[i];
        psum += e.prior[i];
        CHECK(e.beta[i] >= 1.0);
        CHECK(e.beta[i] <= 3.0);
    }
    CHECK(mean == doctest::Approx(1.86).epsilon(1e-12));
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));

    const std::string path = "test_ensemble.csv";
    save_beta_ensemble(path, e, "synthetic placeholder");
    BetaEnsemble r = load_beta_ensemble(path);
    REQUIRE(r.size() == e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(r.beta[i] == e.beta[i]);
        CHECK(r.prior[i] == doctest::Approx(e.prior[i]).epsilon(1e-15));
    }
    std::remove(path.c_str());
}

TEST_CASE("xi parsing and labels") {
    CHECK(parse_xi("neutral").neutral);
    CHECK(parse_xi("0.1").value == doctest::Approx(0.1));
    CHECK_THROWS_AS(parse_xi("-1"), ConfigError);
    CHECK(xi_label(Xi::make_neutral()) == "neutral");
    CHECK(xi_label(Xi::make(0.1)) == "xi0_1");
    CHECK(uncertainty_tag(UncertaintyConfig::neutral()) == "neutral");
    CHECK(uncertainty_tag(UncertaintyConfig::climate_and_jumps(Xi::make(0.1))) ==
          "xi0_1");
}

TEST_CASE("manifest records file hashes") {
    const std::string f1 = "test_manifest_payload.txt";
    std::ofstream(f1) << "payload";
    Manifest m("test_manifest.txt");
    m.add(f1, "notes=1");
    m.write();
    std::ifstream is("test_manifest.txt");
    std::string line;
    std::getline(is, line);
    CHECK(line.find(f1) != std::string::npos);
    CHECK(line.find("hash=") != std::string::npos);
    CHECK(line.find("notes=1") != std::string::npos);
    std::remove(f1.c_str());
    std::remove("test_manifest.txt");
}
