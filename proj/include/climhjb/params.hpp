#ifndef CLIMHJB_PARAMS_HPP
#define CLIMHJB_PARAMS_HPP

#include <string>
#include <vector>

namespace climhjb {

/// Production / capital-accumulation side of the economy.
///
/// Two production sectors ("d" emits carbon, "g" does not) with AK technology
/// and logarithmic adjustment costs, plus a knowledge stock that raises the
/// arrival rate of a one-time productivity improvement in sector g.
struct EconParams {
    double delta = 0.025;          // subjective discount rate, 1/yr

    double alpha_d = -0.035;       // capital drift intercepts, 1/yr
    double alpha_g = -0.035;
    double Gamma_d = 0.025;        // adjustment-cost conversion factors
    double Gamma_g = 0.025;
    double theta_d = 100.0;        // adjustment-cost scales
    double theta_g = 100.0;
    double sigma_d = 0.15;         // capital volatilities, 1/sqrt(yr)
    double sigma_g = 0.15;

    double A_d = 0.12;             // sector productivities, output per unit capital
    double A_g = 0.10;
    std::vector<double> a_g_post;  // post-innovation sector-g productivities A_g^j
    std::vector<double> pi_tech;   // prior over post-innovation outcomes

    double zeta = 0.0;             // knowledge decay rate, 1/yr
    double psi_0 = 0.10583;        // R&D effectiveness scale
    double psi_1 = 0.5;            // R&D effectiveness curvature, (0,1]
    double sigma_kappa = 0.016;    // knowledge volatility
    double varrho = 448.0;         // knowledge-to-arrival-rate scale
};

/// Climate response and damage-curve side.
struct ClimateParams {
    double beta_f = 1.86e-3;       // mean warming per GtC of cumulative emissions
    double eta = 0.17;             // GtC emitted per unit of sector-d output
    double varsigma = 1.2 * 1.86e-3;  // temperature volatility loading

    double gamma_1 = 0.00017675;   // damage-curve slope coefficients
    double gamma_2 = 2.0 * 0.0022;
    std::vector<double> gamma_3;   // post-jump curvature outcomes, nondecreasing
    std::vector<double> pi_damage; // prior over curvature outcomes

    double r_1 = 1.5;              // damage-jump intensity coefficients
    double r_2 = 2.5;
    double y_lower = 1.5;          // intensity threshold (deg C)
    double y_upper = 2.0;          // jump-adjustment anchor (deg C)
};

/// Robustness penalty. `neutral` encodes an infinitely costly distortion,
/// i.e. no uncertainty adjustment at all.
struct Xi {
    double value = 0.1;
    bool neutral = false;

    static Xi make(double v) { return Xi{v, false}; }
    static Xi make_neutral() { return Xi{0.0, true}; }
};

/// One penalty per channel; they default to a common value. The drift
/// distortion splits by shock: capital (dirty+green), temperature, knowledge.
struct UncertaintyConfig {
    Xi drift_capital;
    Xi drift_temperature;
    Xi drift_knowledge;
    Xi jump_tech;    // technology-jump distortions g_j
    Xi jump_damage;  // damage-jump distortions f_m

    static UncertaintyConfig common(Xi xi) {
        return UncertaintyConfig{xi, xi, xi, xi, xi};
    }
    /// Misspecification over the jumps and the climate dynamics only; the
    /// capital and knowledge drifts stay undistorted.
    static UncertaintyConfig climate_and_jumps(Xi xi) {
        UncertaintyConfig u = neutral();
        u.drift_temperature = xi;
        u.jump_tech = xi;
        u.jump_damage = xi;
        return u;
    }
    static UncertaintyConfig jumps_only(Xi xi) {
        UncertaintyConfig u = neutral();
        u.jump_tech = xi;
        u.jump_damage = xi;
        return u;
    }
    static UncertaintyConfig neutral() { return common(Xi::make_neutral()); }
    bool all_neutral() const {
        return drift_capital.neutral && drift_temperature.neutral &&
               drift_knowledge.neutral && jump_tech.neutral && jump_damage.neutral;
    }
};

/// Filename-friendly tag: "neutral" or the first finite penalty value.
std::string uncertainty_tag(const UncertaintyConfig& xi);

struct ModelParams {
    EconParams econ;
    ClimateParams climate;

    /// Fills a_g_post / gamma_3 / priors from the counts when left empty:
    /// A_g^j = A_g (1 + (j-1)/(J-1)), gamma_3^m = (1/3)(m-1)/(M-1), uniform priors.
    void finalize(int n_damage_models = 20, int n_tech_models = 3);

    /// Throws ConfigError when an invariant is broken.
    void validate() const;

    int n_damage() const { return (int)climate.gamma_3.size(); }
    int n_tech() const { return (int)econ.a_g_post.size(); }

    /// Canonical serialization of every parameter; hash() is FNV-1a over it.
    std::string canonical_text() const;
    std::string hash() const;
};

/// Paper calibration (default): all values from the published tables.
ModelParams preset_table_1_2_3(int n_damage_models = 20, int n_tech_models = 3);

/// Alternative calibration from the appendix (log adjustment costs, RFS-style).
ModelParams preset_appendix_alt(int n_damage_models = 20, int n_tech_models = 3);

/// Lookup by name: "table-1-2-3" or "appendix-alt".
ModelParams preset_by_name(const std::string& name, int n_damage_models = 20,
                           int n_tech_models = 3);

/// Climate-sensitivity model ensemble (per-model warming coefficient + prior).
struct BetaEnsemble {
    std::vector<double> beta;
    std::vector<double> prior;
    std::size_t size() const { return beta.size(); }
};

/// Deterministic synthetic stand-in for the (unpublished) pulse-experiment
/// ensemble: `n` models spread over [1.0, 3.0] per 1000 GtC with the mean
/// pinned to 1.86, uniform priors.
BetaEnsemble synthetic_beta_ensemble(int n = 144);

}  // namespace climhjb

#endif
