#ifndef CLIMHJB_HJB_DETAIL_HPP
#define CLIMHJB_HJB_DETAIL_HPP

// Templated assembly of the Bellman right-hand side. The finite-difference
// solver instantiates these with Real = double; the network trainer
// instantiates them with tape variables, so both evaluate literally the same
// expression tree.

#include <vector>

#include "climhjb/model.hpp"
#include "climhjb/model_ops.hpp"
#include "climhjb/params.hpp"

namespace climhjb::detail {

using std::exp;
using std::log;
using ops::count_clamped;

inline long long count_outside(double x, double lo, double hi) {
    return (x < lo || x > hi) ? 1 : 0;
}
inline double clamp_both(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

template <class Real>
struct HjbPointT {
    Real log_k, r, y_hat, log_kappa;
    Real a_g_eff;                  // sector-g productivity in this jump phase
    Real gamma3;                   // realized damage curvature (ignored pre-jump)
    bool damage_realized = false;
    bool has_kappa = true;         // knowledge terms and R&D control present
};

template <class Real>
struct ValueEvalT {
    Real v, v_k, v_r, v_y, v_x, v_kk, v_rr, v_yy, v_xx, v_kr;
};

template <class Real>
struct ControlsT {
    Real i_d, i_g, i_kappa;
};

template <class Real>
struct JumpContT {
    std::vector<Real> tech_values;
    std::vector<double> tech_priors;
    std::vector<Real> damage_values;
    std::vector<double> damage_priors;
};

/// A channel whose flag is false behaves exactly like the neutral distortion
/// (h = 0, g = 1, f = 1) without materializing those constants.
template <class Real>
struct DistortionsT {
    bool has_h_cap = false;  // dirty+green capital shocks
    bool has_h_y = false;    // temperature shock
    bool has_h_x = false;    // knowledge shock
    Real h_d{}, h_g{}, h_y{}, h_x{};
    bool has_g = false;
    std::vector<Real> g;
    bool has_f = false;
    std::vector<Real> f;
};

/// Closed-form minimizing distortions. Exponents are capped at
/// +-kDistortionExpCap to keep early, badly-scaled value iterates finite;
/// cap hits are counted into *exp_capped.
template <class Real>
DistortionsT<Real> min_foc_t(const HjbPointT<Real>& pt, const ValueEvalT<Real>& ve,
                             const JumpContT<Real>& jc, const UncertaintyConfig& xi,
                             const ModelParams& p, long long* exp_capped) {
    const EconParams& e = p.econ;
    const ClimateParams& cl = p.climate;
    DistortionsT<Real> d;

    if (!xi.drift_capital.neutral) {
        const double inv = 1.0 / xi.drift_capital.value;
        d.has_h_cap = true;
        d.h_d = (-inv * e.sigma_d) * ((ve.v_k - pt.r * ve.v_r) * (1.0 - pt.r));
        d.h_g = (-inv * e.sigma_g) * ((ve.v_k + (1.0 - pt.r) * ve.v_r) * pt.r);
    }
    if (!xi.drift_temperature.neutral) {
        const double inv = 1.0 / xi.drift_temperature.value;
        Real em = ops::emissions_t(pt.log_k, pt.r, p);
        Real slope = ops::damage_slope_t(pt.y_hat, pt.gamma3, pt.damage_realized, cl);
        d.has_h_y = true;
        d.h_y = (-inv * cl.varsigma) * (em * (ve.v_y - slope));
    }
    if (pt.has_kappa && !xi.drift_knowledge.neutral) {
        const double inv = 1.0 / xi.drift_knowledge.value;
        d.has_h_x = true;
        d.h_x = (-inv * e.sigma_kappa) * ve.v_x;
    }

    const double cap = kDistortionExpCap;
    if (!jc.tech_values.empty() && !xi.jump_tech.neutral) {
        const double inv = 1.0 / xi.jump_tech.value;
        d.has_g = true;
        d.g.reserve(jc.tech_values.size());
        for (const Real& cont : jc.tech_values) {
            Real arg = (-inv) * (cont - ve.v);
            if (exp_capped) *exp_capped += count_outside(arg, -cap, cap);
            d.g.push_back(exp(clamp_both(arg, -cap, cap)));
        }
    }
    if (!jc.damage_values.empty() && !xi.jump_damage.neutral) {
        const double inv = 1.0 / xi.jump_damage.value;
        d.has_f = true;
        d.f.reserve(jc.damage_values.size());
        for (const Real& cont : jc.damage_values) {
            Real arg = (-inv) * (cont - ve.v);
            if (exp_capped) *exp_capped += count_outside(arg, -cap, cap);
            d.f.push_back(exp(clamp_both(arg, -cap, cap)));
        }
    }
    return d;
}

/// Bellman right-hand side at the given point. With the maximizing controls
/// and minimizing distortions plugged in, rhs - delta v is the residual the
/// solvers drive to zero.
template <class Real>
Real hjb_rhs_t(const HjbPointT<Real>& pt, const ValueEvalT<Real>& ve,
               const ControlsT<Real>& c, const DistortionsT<Real>& dist,
               const JumpContT<Real>& jc, const UncertaintyConfig& xi,
               const ModelParams& p, ClampStats* stats) {
    const EconParams& e = p.econ;
    const ClimateParams& cl = p.climate;

    Real cns = ops::consumption_t(pt.r, c.i_d, c.i_g, c.i_kappa, pt.a_g_eff, e.A_d);
    long long cns_clamped = count_clamped(cns, kConsumptionFloor);
    long long adj_clamped = 0;
    Real cns_safe = clamp_min(cns, kConsumptionFloor);

    Real phi_d = ops::conversion_t(c.i_d, e.alpha_d, e.Gamma_d, e.theta_d,
                                   kAdjustmentFloor, &adj_clamped);
    Real phi_g = ops::conversion_t(c.i_g, e.alpha_g, e.Gamma_g, e.theta_g,
                                   kAdjustmentFloor, &adj_clamped);
    if (cns_clamped || adj_clamped) {
        if (!stats) throw SolveError("infeasible controls in Bellman evaluation");
        stats->consumption += cns_clamped;
        stats->adjustment += adj_clamped;
    }

    const double sd2 = sq(e.sigma_d), sg2 = sq(e.sigma_g);
    Real om = 1.0 - pt.r;
    Real em = ops::emissions_t(pt.log_k, pt.r, p);
    Real slope = ops::damage_slope_t(pt.y_hat, pt.gamma3, pt.damage_realized, cl);

    Real diff_k = 0.5 * (sd2 * square(om) + sg2 * square(pt.r));
    Real diff_r = (0.5 * (sd2 + sg2)) * square(pt.r * om);
    Real cross_kr = sg2 * (square(pt.r) * om) - sd2 * (square(om) * pt.r);
    Real diff_y = (0.5 * sq(cl.varsigma)) * square(em);

    Real rhs = e.delta * log(cns_safe) + e.delta * pt.log_k;
    rhs = rhs + (om * phi_d + pt.r * phi_g - diff_k) * ve.v_k + diff_k * ve.v_kk;
    rhs = rhs + ((phi_g - phi_d) + (om * sd2 - pt.r * sg2)) * (pt.r * om) * ve.v_r;
    rhs = rhs + diff_r * ve.v_rr + cross_kr * ve.v_kr + diff_y * ve.v_yy;

    // temperature drift, damage drift, and the quadratic damage correction
    Real quad = (0.5 * cl.gamma_2 * sq(cl.varsigma)) * square(em);
    if (pt.damage_realized)
        quad = quad + (0.5 * sq(cl.varsigma)) * (pt.gamma3 * square(em));
    if (dist.has_h_y) {
        Real beta_t = cl.beta_f + cl.varsigma * dist.h_y;
        rhs = rhs + beta_t * em * ve.v_y - (slope * beta_t * em + quad);
        if (!xi.drift_temperature.neutral)
            rhs = rhs + (0.5 * xi.drift_temperature.value) * square(dist.h_y);
    } else {
        rhs = rhs + cl.beta_f * em * ve.v_y - (slope * (cl.beta_f) * em + quad);
    }

    // capital-channel drift tilts and their quadratic entropy penalty
    if (dist.has_h_cap) {
        Real s_d = (ve.v_k - pt.r * ve.v_r) * (om * e.sigma_d);
        Real s_g = (ve.v_k + om * ve.v_r) * (pt.r * e.sigma_g);
        rhs = rhs + s_d * dist.h_d + s_g * dist.h_g;
        if (!xi.drift_capital.neutral)
            rhs = rhs + (0.5 * xi.drift_capital.value) *
                            (square(dist.h_d) + square(dist.h_g));
    }

    if (pt.has_kappa) {
        Real mu_x = ops::rd_conversion_t(c.i_kappa, pt.log_k, pt.log_kappa, e) -
                    (e.zeta + 0.5 * sq(e.sigma_kappa));
        if (dist.has_h_x) {
            mu_x = mu_x + e.sigma_kappa * dist.h_x;
            if (!xi.drift_knowledge.neutral)
                rhs = rhs + (0.5 * xi.drift_knowledge.value) * square(dist.h_x);
        }
        rhs = rhs + mu_x * ve.v_x + (0.5 * sq(e.sigma_kappa)) * ve.v_xx;
    }

    if (!jc.tech_values.empty()) {
        Real lam = ops::tech_intensity_t(pt.log_kappa, e);
        if (dist.has_g) {
            Real sum = (jc.tech_priors[0] * dist.g[0]) * (jc.tech_values[0] - ve.v);
            for (std::size_t j = 1; j < jc.tech_values.size(); ++j)
                sum = sum + (jc.tech_priors[j] * dist.g[j]) * (jc.tech_values[j] - ve.v);
            rhs = rhs + lam * sum;
            if (!xi.jump_tech.neutral) {
                Real ent = jc.tech_priors[0] * (1.0 - dist.g[0] + dist.g[0] * log(dist.g[0]));
                for (std::size_t j = 1; j < jc.tech_values.size(); ++j)
                    ent = ent +
                          jc.tech_priors[j] * (1.0 - dist.g[j] + dist.g[j] * log(dist.g[j]));
                rhs = rhs + xi.jump_tech.value * (lam * ent);
            }
        } else {
            Real sum = jc.tech_priors[0] * (jc.tech_values[0] - ve.v);
            for (std::size_t j = 1; j < jc.tech_values.size(); ++j)
                sum = sum + jc.tech_priors[j] * (jc.tech_values[j] - ve.v);
            rhs = rhs + lam * sum;
        }
    }

    if (!jc.damage_values.empty()) {
        Real lam = ops::damage_intensity_t(pt.y_hat, cl);
        if (dist.has_f) {
            Real sum = (jc.damage_priors[0] * dist.f[0]) * (jc.damage_values[0] - ve.v);
            for (std::size_t m = 1; m < jc.damage_values.size(); ++m)
                sum = sum + (jc.damage_priors[m] * dist.f[m]) * (jc.damage_values[m] - ve.v);
            rhs = rhs + lam * sum;
            if (!xi.jump_damage.neutral) {
                Real ent =
                    jc.damage_priors[0] * (1.0 - dist.f[0] + dist.f[0] * log(dist.f[0]));
                for (std::size_t m = 1; m < jc.damage_values.size(); ++m)
                    ent = ent +
                          jc.damage_priors[m] * (1.0 - dist.f[m] + dist.f[m] * log(dist.f[m]));
                rhs = rhs + xi.jump_damage.value * (lam * ent);
            }
        } else {
            Real sum = jc.damage_priors[0] * (jc.damage_values[0] - ve.v);
            for (std::size_t m = 1; m < jc.damage_values.size(); ++m)
                sum = sum + jc.damage_priors[m] * (jc.damage_values[m] - ve.v);
            rhs = rhs + lam * sum;
        }
    }

    return rhs;
}

}  // namespace climhjb::detail

#endif
