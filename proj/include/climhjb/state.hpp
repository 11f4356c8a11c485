#ifndef CLIMHJB_STATE_HPP
#define CLIMHJB_STATE_HPP

#include <array>
#include <string>
#include <vector>

#include "climhjb/common.hpp"
#include "climhjb/params.hpp"

namespace climhjb {

/// Which of the two one-shot jumps (damage revelation, green innovation) have
/// already been realized. `m` indexes the revealed damage curvature, `j` the
/// realized productivity outcome; -1 when not applicable.
struct JumpState {
    enum class Phase { PreBoth, PostTech, PostDamage, PostBoth };

    Phase phase = Phase::PreBoth;
    int m = -1;
    int j = -1;

    static JumpState pre_both() { return {Phase::PreBoth, -1, -1}; }
    static JumpState post_tech(int j) { return {Phase::PostTech, -1, j}; }
    static JumpState post_damage(int m) { return {Phase::PostDamage, m, -1}; }
    static JumpState post_both(int m, int j) { return {Phase::PostBoth, m, j}; }

    bool damage_realized() const {
        return phase == Phase::PostDamage || phase == Phase::PostBoth;
    }
    bool tech_realized() const {
        return phase == Phase::PostTech || phase == Phase::PostBoth;
    }
    /// Knowledge capital matters only while the innovation is still pending.
    bool has_kappa() const { return !tech_realized(); }
    /// R&D investment is chosen only while the innovation is still pending.
    bool has_rd() const { return !tech_realized(); }

    std::string tag() const {
        switch (phase) {
            case Phase::PreBoth: return "preboth";
            case Phase::PostTech: return "posttech_j" + std::to_string(j);
            case Phase::PostDamage: return "postdamage_m" + std::to_string(m);
            case Phase::PostBoth:
                return "postboth_m" + std::to_string(m) + "_j" + std::to_string(j);
        }
        return "?";
    }
};

/// Effective sector-g productivity in a given jump state.
inline double a_g_effective(const EconParams& e, const JumpState& js) {
    if (js.tech_realized()) {
        if (js.j < 0 || js.j >= (int)e.a_g_post.size())
            throw SolveError("tech outcome index out of range");
        return e.a_g_post[js.j];
    }
    return e.A_g;
}

/// Realized post-jump damage curvature (0 before the damage jump).
inline double gamma3_effective(const ClimateParams& c, const JumpState& js) {
    if (js.damage_realized()) {
        if (js.m < 0 || js.m >= (int)c.gamma_3.size())
            throw SolveError("damage outcome index out of range");
        return c.gamma_3[js.m];
    }
    return 0.0;
}

/// Point in the (log capital, green share, temperature anomaly, log knowledge)
/// state space. `log_kappa` is ignored in post-innovation states.
struct State {
    double log_k = 0.0;
    double r = 0.5;
    double y_hat = 0.0;
    double log_kappa = 0.0;
    JumpState jump;
};

/// Planner's investment ratios. `i_kappa` is zero in post-innovation states.
struct Controls {
    double i_d = 0.0;
    double i_g = 0.0;
    double i_kappa = 0.0;
};

/// Minimizing agent's worst-case tilts. `h` is aligned with the four
/// independent shocks (dirty capital, green capital, temperature, knowledge);
/// `g` tilts technology outcomes, `f` damage outcomes.
struct Distortions {
    std::array<double, 4> h{0.0, 0.0, 0.0, 0.0};
    std::vector<double> g;
    std::vector<double> f;

    static Distortions neutral(int n_tech, int n_damage) {
        Distortions d;
        d.g.assign(n_tech, 1.0);
        d.f.assign(n_damage, 1.0);
        return d;
    }
};

enum : int { SHOCK_D = 0, SHOCK_G = 1, SHOCK_Y = 2, SHOCK_K = 3 };

/// Value and derivatives at a state point. Suffixes: _k = log capital,
/// _r = green share, _y = temperature anomaly, _x = log knowledge.
struct ValueEval {
    double v = 0.0;
    double v_k = 0.0, v_r = 0.0, v_y = 0.0, v_x = 0.0;
    double v_kk = 0.0, v_rr = 0.0, v_yy = 0.0, v_xx = 0.0, v_kr = 0.0;
    bool has_kappa = true;
};

/// Continuation values for the pending jumps, evaluated at the same
/// (log K, R, y) point as the value function being assembled.
struct JumpTermInputs {
    std::vector<double> tech_values;    // one per technology outcome
    std::vector<double> tech_priors;
    std::vector<double> damage_values;  // one per damage outcome
    std::vector<double> damage_priors;
};

/// Box over the four state coordinates; defaults are the calibrated ranges.
struct Domain {
    std::array<double, 4> lo{4.0, 0.01, 0.0, 1.0};
    std::array<double, 4> hi{8.5, 0.99, 4.0, 6.0};

    bool contains(double log_k, double r, double y, double log_kappa,
                  bool with_kappa) const {
        const double x[4] = {log_k, r, y, log_kappa};
        for (int d = 0; d < (with_kappa ? 4 : 3); ++d)
            if (x[d] < lo[d] || x[d] > hi[d]) return false;
        return true;
    }
};

/// Uniform evaluation interface over solved value functions (grid or network).
class ValueField {
public:
    virtual ~ValueField() = default;
    virtual ValueEval eval(const State& s) const = 0;
    virtual double value(const State& s) const = 0;
};

}  // namespace climhjb

#endif
