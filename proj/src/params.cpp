#include "climhjb/params.hpp"

#include <cmath>
#include <sstream>

#include "climhjb/common.hpp"

namespace climhjb {

void ModelParams::finalize(int n_damage_models, int n_tech_models) {
    if (econ.a_g_post.empty()) {
        econ.a_g_post.resize(n_tech_models);
        for (int j = 0; j < n_tech_models; ++j) {
            double frac = n_tech_models > 1 ? double(j) / double(n_tech_models - 1) : 1.0;
            econ.a_g_post[j] = econ.A_g * (1.0 + frac);
        }
    }
    if (econ.pi_tech.empty())
        econ.pi_tech.assign(econ.a_g_post.size(), 1.0 / double(econ.a_g_post.size()));

    if (climate.gamma_3.empty()) {
        climate.gamma_3.resize(n_damage_models);
        for (int m = 0; m < n_damage_models; ++m) {
            double frac = n_damage_models > 1 ? double(m) / double(n_damage_models - 1) : 1.0;
            climate.gamma_3[m] = frac / 3.0;
        }
    }
    if (climate.pi_damage.empty())
        climate.pi_damage.assign(climate.gamma_3.size(), 1.0 / double(climate.gamma_3.size()));
}

void ModelParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("parameter invariant violated: ") + what);
    };
    const EconParams& e = econ;
    const ClimateParams& c = climate;

    require(e.delta > 0, "delta > 0");
    require(e.theta_d > 0 && e.theta_g > 0, "theta_d, theta_g > 0");
    require(e.Gamma_d > 0 && e.Gamma_g > 0, "Gamma_d, Gamma_g > 0");
    require(e.psi_0 > 0, "psi_0 > 0");
    require(e.psi_1 > 0 && e.psi_1 <= 1.0, "0 < psi_1 <= 1");
    require(e.varrho > 0, "varrho > 0");

    require(!e.a_g_post.empty(), "a_g_post nonempty");
    require(e.a_g_post.size() == e.pi_tech.size(), "pi_tech size matches a_g_post");
    double sum_pi = 0;
    for (std::size_t j = 0; j < e.a_g_post.size(); ++j) {
        require(e.a_g_post[j] >= e.A_g, "A_g^j >= A_g");
        if (j > 0) require(e.a_g_post[j] >= e.a_g_post[j - 1], "a_g_post nondecreasing");
        require(e.pi_tech[j] >= 0, "pi_tech nonnegative");
        sum_pi += e.pi_tech[j];
    }
    require(std::abs(sum_pi - 1.0) < 1e-12, "pi_tech sums to 1");

    require(!c.gamma_3.empty(), "gamma_3 nonempty");
    require(c.gamma_3.size() == c.pi_damage.size(), "pi_damage size matches gamma_3");
    sum_pi = 0;
    for (std::size_t m = 0; m < c.gamma_3.size(); ++m) {
        require(c.gamma_3[m] >= 0, "gamma_3 nonnegative");
        if (m > 0) require(c.gamma_3[m] >= c.gamma_3[m - 1], "gamma_3 nondecreasing");
        require(c.pi_damage[m] >= 0, "pi_damage nonnegative");
        sum_pi += c.pi_damage[m];
    }
    require(std::abs(sum_pi - 1.0) < 1e-12, "pi_damage sums to 1");

    require(c.y_lower < c.y_upper, "y_lower < y_upper");
    require(c.r_1 > 0 && c.r_2 > 0, "r_1, r_2 > 0");
    require(c.eta > 0, "eta > 0");
}

std::string ModelParams::canonical_text() const {
    std::ostringstream os;
    auto put = [&os](const char* name, double v) { os << name << '=' << fmt_g17(v) << '\n'; };
    auto put_vec = [&os](const char* name, const std::vector<double>& v) {
        os << name << '=';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt_g17(v[i]);
        os << '\n';
    };
    const EconParams& e = econ;
    const ClimateParams& c = climate;
    put("delta", e.delta);
    put("alpha_d", e.alpha_d);
    put("alpha_g", e.alpha_g);
    put("Gamma_d", e.Gamma_d);
    put("Gamma_g", e.Gamma_g);
    put("theta_d", e.theta_d);
    put("theta_g", e.theta_g);
    put("sigma_d", e.sigma_d);
    put("sigma_g", e.sigma_g);
    put("A_d", e.A_d);
    put("A_g", e.A_g);
    put_vec("a_g_post", e.a_g_post);
    put_vec("pi_tech", e.pi_tech);
    put("zeta", e.zeta);
    put("psi_0", e.psi_0);
    put("psi_1", e.psi_1);
    put("sigma_kappa", e.sigma_kappa);
    put("varrho", e.varrho);
    put("beta_f", c.beta_f);
    put("eta", c.eta);
    put("varsigma", c.varsigma);
    put("gamma_1", c.gamma_1);
    put("gamma_2", c.gamma_2);
    put_vec("gamma_3", c.gamma_3);
    put_vec("pi_damage", c.pi_damage);
    put("r_1", c.r_1);
    put("r_2", c.r_2);
    put("y_lower", c.y_lower);
    put("y_upper", c.y_upper);
    return os.str();
}

std::string ModelParams::hash() const { return hex16(fnv1a64(canonical_text())); }

ModelParams preset_table_1_2_3(int n_damage_models, int n_tech_models) {
    ModelParams p;  // struct defaults are the published calibration
    p.finalize(n_damage_models, n_tech_models);
    return p;
}

ModelParams preset_appendix_alt(int n_damage_models, int n_tech_models) {
    ModelParams p;
    p.econ.delta = 0.01;
    p.econ.alpha_d = -0.035;
    p.econ.Gamma_d = 0.060;
    p.econ.theta_d = 16.7;
    p.econ.alpha_g = -0.038;
    p.econ.Gamma_g = 0.0633;
    p.econ.theta_g = 15.7895;
    // the table lists the volatility set {0.01, 0.016, 0.02}; middle member used
    p.econ.sigma_d = 0.016;
    p.econ.sigma_g = 0.016;
    p.econ.sigma_kappa = 0.0078;
    p.econ.varrho = 1120.0;
    p.econ.a_g_post = {0.15, 0.20, 0.30};
    p.finalize(n_damage_models, n_tech_models);
    return p;
}

ModelParams preset_by_name(const std::string& name, int n_damage_models, int n_tech_models) {
    if (name == "table-1-2-3") return preset_table_1_2_3(n_damage_models, n_tech_models);
    if (name == "appendix-alt") return preset_appendix_alt(n_damage_models, n_tech_models);
    throw ConfigError("unknown preset: " + name);
}

std::string uncertainty_tag(const UncertaintyConfig& xi) {
    const Xi* order[5] = {&xi.jump_damage, &xi.jump_tech, &xi.drift_temperature,
                          &xi.drift_capital, &xi.drift_knowledge};
    for (const Xi* x : order) {
        if (!x->neutral) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", x->value);
            std::string s = buf;
            for (char& c : s)
                if (c == '.' || c == '+' || c == '-') c = '_';
            return "xi" + s;
        }
    }
    return "neutral";
}

BetaEnsemble synthetic_beta_ensemble(int n) {
    // Evenly spread over [1, 3], then contracted about the target mean 1.86 so
    // the mean is exact and the whole support stays inside [1, 3].
    BetaEnsemble e;
    e.beta.resize(n);
    e.prior.assign(n, 1.0 / double(n));
    const double target_mean = 1.86;
    const double scale = (target_mean - 1.0) / 1.0;  // shrink toward the left edge
    for (int i = 0; i < n; ++i) {
        double u = n > 1 ? double(i) / double(n - 1) : 0.5;  // in [0,1], mean 1/2
        double x = 1.0 + 2.0 * u;                            // in [1,3], mean 2.0
        e.beta[i] = target_mean + (x - 2.0) * scale;
    }
    return e;
}

}  // namespace climhjb
