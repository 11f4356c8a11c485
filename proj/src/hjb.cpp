#include "climhjb/hjb.hpp"

#include <algorithm>
#include <cmath>

#include "climhjb/hjb_detail.hpp"

namespace climhjb {

namespace {

detail::HjbPointT<double> make_point(const State& s, const ModelParams& p) {
    detail::HjbPointT<double> pt;
    pt.log_k = s.log_k;
    pt.r = s.r;
    pt.y_hat = s.y_hat;
    pt.log_kappa = s.log_kappa;
    pt.a_g_eff = a_g_effective(p.econ, s.jump);
    pt.gamma3 = gamma3_effective(p.climate, s.jump);
    pt.damage_realized = s.jump.damage_realized();
    pt.has_kappa = s.jump.has_kappa();
    return pt;
}

detail::ValueEvalT<double> make_eval(const ValueEval& ve) {
    return {ve.v,  ve.v_k,  ve.v_r,  ve.v_y,  ve.v_x,
            ve.v_kk, ve.v_rr, ve.v_yy, ve.v_xx, ve.v_kr};
}

detail::JumpContT<double> make_jumps(const JumpTermInputs& jumps) {
    detail::JumpContT<double> jc;
    jc.tech_values = jumps.tech_values;
    jc.tech_priors = jumps.tech_priors;
    jc.damage_values = jumps.damage_values;
    jc.damage_priors = jumps.damage_priors;
    return jc;
}

detail::DistortionsT<double> make_distortions(const Distortions& d,
                                              const JumpTermInputs& jumps) {
    detail::DistortionsT<double> dd;
    dd.has_h_cap = true;
    dd.has_h_y = true;
    dd.has_h_x = true;
    dd.h_d = d.h[SHOCK_D];
    dd.h_g = d.h[SHOCK_G];
    dd.h_y = d.h[SHOCK_Y];
    dd.h_x = d.h[SHOCK_K];
    if (!d.g.empty()) {
        if (d.g.size() != jumps.tech_values.size())
            throw SolveError("technology distortion count mismatch");
        dd.has_g = true;
        dd.g = d.g;
    }
    if (!d.f.empty()) {
        if (d.f.size() != jumps.damage_values.size())
            throw SolveError("damage distortion count mismatch");
        dd.has_f = true;
        dd.f = d.f;
    }
    return dd;
}

}  // namespace

void check_jump_inputs(const JumpState& js, const JumpTermInputs& jumps) {
    const bool want_tech = !js.tech_realized();
    const bool want_damage = !js.damage_realized();
    if (want_tech != !jumps.tech_values.empty())
        throw SolveError("technology continuation values do not match jump phase");
    if (want_damage != !jumps.damage_values.empty())
        throw SolveError("damage continuation values do not match jump phase");
    if (jumps.tech_values.size() != jumps.tech_priors.size())
        throw SolveError("technology continuation/prior count mismatch");
    if (jumps.damage_values.size() != jumps.damage_priors.size())
        throw SolveError("damage continuation/prior count mismatch");
    for (double v : jumps.tech_values)
        if (!std::isfinite(v)) throw SolveError("non-finite technology continuation value");
    for (double v : jumps.damage_values)
        if (!std::isfinite(v)) throw SolveError("non-finite damage continuation value");
}

JumpTermInputs empty_jump_inputs() { return {}; }

double consumption(const State& s, const Controls& c, const ModelParams& p) {
    return ops::consumption_t(s.r, c.i_d, c.i_g,
                              s.jump.has_rd() ? c.i_kappa : 0.0,
                              a_g_effective(p.econ, s.jump), p.econ.A_d);
}

Controls max_foc_solve(const State& s, const ValueEval& ve, const ModelParams& p,
                       const FocOptions& opt) {
    const EconParams& e = p.econ;
    const double a_g = a_g_effective(p.econ, s.jump);
    const double r = s.r, om = 1.0 - s.r;

    double b_d = ve.v_k - r * ve.v_r;
    double b_g = ve.v_k + om * ve.v_r;
    if (!opt.clamp_nonpositive_marginals) {
        if (b_d <= 0.0 || b_g <= 0.0)
            throw SolveError("nonpositive marginal value of capital in FOC solve");
    } else {
        // The model has a knife edge where a capital type loses all marginal
        // value (the log adjustment cost admits unbounded disinvestment
        // there). Smooth the marginal value below a small width so grid
        // policies stay C1 instead of toggling across the boundary; values
        // above the width are untouched.
        const double w = 0.02;
        auto soften = [w](double b) { return b >= w ? b : w * std::exp((b - w) / w); };
        if (opt.stats) opt.stats->marginal_value += (b_d < w) + (b_g < w);
        b_d = soften(b_d);
        b_g = soften(b_g);
    }

    const bool rd_active = s.jump.has_rd() && ve.v_x > 0.0;
    double rd_scale = 0.0, rd_exponent = 0.0;
    if (rd_active) {
        if (e.psi_1 >= 1.0)
            throw SolveError("interior R&D optimum requires psi_1 < 1");
        // i_k = (psi0 psi1 X v_x c / delta)^{1/(1-psi1)}
        rd_scale = e.psi_0 * e.psi_1 * std::exp(e.psi_1 * (s.log_k - s.log_kappa)) *
                   ve.v_x / e.delta;
        rd_exponent = 1.0 / (1.0 - e.psi_1);
    }

    const double slope_d = e.Gamma_d * b_d / e.delta;  // d i_d / d c
    const double slope_g = e.Gamma_g * b_g / e.delta;
    const double gross = e.A_d * om + a_g * r;

    auto controls_at = [&](double c) {
        Controls ctl;
        ctl.i_d = (e.theta_d * slope_d * c - 1.0) / e.theta_d;
        ctl.i_g = (e.theta_g * slope_g * c - 1.0) / e.theta_g;
        ctl.i_kappa = rd_active ? std::pow(rd_scale * c, rd_exponent) : 0.0;
        return ctl;
    };
    auto gap = [&](double c) {
        Controls ctl = controls_at(c);
        return gross - ctl.i_d * om - ctl.i_g * r - ctl.i_kappa - c;
    };

    // gap(c) is strictly decreasing with gap(0+) > 0; expand upward if the
    // optimum allows disinvestment-financed consumption above gross output
    double lo = 1e-12, hi = std::max(gross, 1e-6);
    int expand = 0;
    while (gap(hi) > 0.0) {
        hi *= 2.0;
        if (++expand > 120) throw SolveError("FOC consumption bracket failed to close");
    }

    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    double c = 0.5 * (lo + hi);
    for (int it = 0; it < 6; ++it) {  // Newton polish on the closed-form derivative
        Controls ctl = controls_at(c);
        double dgap = -(om * e.Gamma_d * b_d + r * e.Gamma_g * b_g) / e.delta - 1.0;
        if (rd_active && ctl.i_kappa > 0.0) dgap -= rd_exponent * ctl.i_kappa / c;
        double step = gap(c) / dgap;
        double next = c - step;
        if (next > 0.0) c = next;
    }

    Controls ctl = controls_at(c);
    if (consumption(s, ctl, p) <= 0.0)
        throw SolveError("FOC solve produced nonpositive consumption");
    return ctl;
}

Distortions min_foc_distortions(const State& s, const ValueEval& ve,
                                const JumpTermInputs& jumps, const UncertaintyConfig& xi,
                                const ModelParams& p, ClampStats* stats) {
    check_jump_inputs(s.jump, jumps);
    long long capped = 0;
    auto dd = detail::min_foc_t(make_point(s, p), make_eval(ve), make_jumps(jumps), xi, p,
                                &capped);
    if (capped && stats) stats->exp_cap += capped;

    Distortions d = Distortions::neutral((int)jumps.tech_values.size(),
                                         (int)jumps.damage_values.size());
    if (dd.has_h_cap) {
        d.h[SHOCK_D] = dd.h_d;
        d.h[SHOCK_G] = dd.h_g;
    }
    if (dd.has_h_y) d.h[SHOCK_Y] = dd.h_y;
    if (dd.has_h_x) d.h[SHOCK_K] = s.jump.has_kappa() ? dd.h_x : 0.0;
    if (dd.has_g) d.g = dd.g;
    if (dd.has_f) d.f = dd.f;
    return d;
}

double hjb_rhs(const State& s, const ValueEval& ve, const Controls& c,
               const Distortions& d, const JumpTermInputs& jumps,
               const UncertaintyConfig& xi, const ModelParams& p, ClampStats* stats) {
    check_jump_inputs(s.jump, jumps);
    detail::ControlsT<double> ctl{c.i_d, c.i_g, s.jump.has_rd() ? c.i_kappa : 0.0};
    return detail::hjb_rhs_t(make_point(s, p), make_eval(ve), ctl,
                             make_distortions(d, jumps), make_jumps(jumps), xi, p, stats);
}

double hjb_residual(const State& s, const ValueEval& ve, const Controls& c,
                    const Distortions& d, const JumpTermInputs& jumps,
                    const UncertaintyConfig& xi, const ModelParams& p,
                    ClampStats* stats) {
    return hjb_rhs(s, ve, c, d, jumps, xi, p, stats) - p.econ.delta * ve.v;
}

std::pair<double, double> distorted_intensities(const State& s, const Distortions& d,
                                                const JumpTermInputs& jumps,
                                                const ModelParams& p) {
    double tech = 0.0, damage = 0.0;
    if (!jumps.tech_priors.empty()) {
        if (!d.g.empty() && d.g.size() != jumps.tech_priors.size())
            throw SolveError("technology distortion count mismatch");
        double w = 0.0;
        for (std::size_t j = 0; j < jumps.tech_priors.size(); ++j)
            w += jumps.tech_priors[j] * (d.g.empty() ? 1.0 : d.g[j]);
        tech = tech_intensity(s.log_kappa, p.econ) * w;
    }
    if (!jumps.damage_priors.empty()) {
        if (!d.f.empty() && d.f.size() != jumps.damage_priors.size())
            throw SolveError("damage distortion count mismatch");
        double w = 0.0;
        for (std::size_t m = 0; m < jumps.damage_priors.size(); ++m)
            w += jumps.damage_priors[m] * (d.f.empty() ? 1.0 : d.f[m]);
        damage = damage_intensity(s.y_hat, p.climate) * w;
    }
    return {tech, damage};
}

}  // namespace climhjb
