#ifndef CLIMHJB_MODEL_OPS_HPP
#define CLIMHJB_MODEL_OPS_HPP

// Elementary model terms, templated on the scalar type so the same expressions
// run on plain doubles and on autodiff tape variables. `Real` must support
// arithmetic with doubles plus exp/expm1/log/pow/clamp_min/square overloads
// found by ordinary or argument-dependent lookup.

#include <cmath>

#include "climhjb/common.hpp"
#include "climhjb/params.hpp"

namespace climhjb::ops {

using std::exp;
using std::expm1;
using std::log;
using std::pow;

inline long long count_clamped(double x, double lo) { return x < lo ? 1 : 0; }

/// Damage-jump arrival rate r1 (exp[(r2/2)(y - y_)^2] - 1) above the threshold.
/// The clamped argument reproduces the indicator exactly: below y_ the
/// exponent is zero and the rate vanishes.
template <class Real>
Real damage_intensity_t(const Real& y, const ClimateParams& c) {
    Real z = clamp_min(y - c.y_lower, 0.0);
    return c.r_1 * expm1((0.5 * c.r_2) * square(z));
}

/// Technology-jump arrival rate, proportional to the knowledge stock.
template <class Real>
Real tech_intensity_t(const Real& log_kappa, const EconParams& e) {
    return exp(log_kappa) * (1.0 / e.varrho);
}

/// Emission flow eta A_d K_d with K_d = (1 - R) K.
template <class Real>
Real emissions_t(const Real& log_k, const Real& r, const ModelParams& p) {
    return (p.climate.eta * p.econ.A_d) * ((1.0 - r) * exp(log_k));
}

/// Local slope of the log-damage curve. `gamma3` is the realized curvature
/// (pass 0.0 and damage_realized=false before the jump).
template <class Real>
Real damage_slope_t(const Real& y_hat, const Real& gamma3, bool damage_realized,
                    const ClimateParams& c) {
    Real s = c.gamma_1 + c.gamma_2 * y_hat;
    if (damage_realized) s = s + gamma3 * (y_hat - c.y_upper);
    return s;
}

/// Capital conversion term alpha + Gamma log(1 + theta i). The argument of the
/// log is floored at `adj_floor`; *clamped is bumped when the floor binds.
template <class Real>
Real conversion_t(const Real& i, double alpha, double Gamma, double theta,
                  double adj_floor, long long* clamped) {
    Real a = 1.0 + theta * i;
    if (clamped) *clamped += count_clamped(a, adj_floor);
    return alpha + Gamma * log(clamp_min(a, adj_floor));
}

/// Per-capital consumption [A_d - i_d](1-R) + [a_g - i_g]R - i_kappa.
template <class Real>
Real consumption_t(const Real& r, const Real& i_d, const Real& i_g, const Real& i_kappa,
                   const Real& a_g_eff, double a_d) {
    return (a_d - i_d) * (1.0 - r) + (a_g_eff - i_g) * r - i_kappa;
}

/// R&D conversion flow psi0 i_k^psi1 exp(psi1 (log K - log kappa)).
template <class Real>
Real rd_conversion_t(const Real& i_kappa, const Real& log_k, const Real& log_kappa,
                     const EconParams& e) {
    return e.psi_0 * pow(i_kappa, e.psi_1) * exp(e.psi_1 * (log_k - log_kappa));
}

}  // namespace climhjb::ops

#endif
