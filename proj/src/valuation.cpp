#include "climhjb/valuation.hpp"

#include <cmath>

#include "climhjb/hjb.hpp"

namespace climhjb {

Valuations social_valuations(const State& s, const ValueEval& ve, const Controls& c,
                             const ModelParams& p) {
    const EconParams& e = p.econ;
    const ClimateParams& cl = p.climate;

    const double cons = consumption(s, c, p);
    if (cons <= 0.0) throw SolveError("nonpositive consumption in valuation");
    const double muc_inv = cons / e.delta;

    const double em = emissions(s, p);
    const double vs2 = sq(cl.varsigma);

    Valuations out;
    out.scc = 1000.0 * cl.eta *
              (-cl.beta_f * ve.v_y - vs2 * em * ve.v_yy +
               (cl.gamma_1 + cl.gamma_2 * s.y_hat) * cl.beta_f + cl.gamma_2 * vs2 * em) *
              muc_inv;
    out.svg = e.Gamma_g * e.theta_g / (1.0 + e.theta_g * c.i_g) *
              (ve.v_k + (1.0 - s.r) * ve.v_r) * muc_inv;
    out.svd = e.Gamma_d * e.theta_d / (1.0 + e.theta_d * c.i_d) *
              (ve.v_k - s.r * ve.v_r) * muc_inv;

    const bool rd = s.jump.has_rd() && c.i_kappa > 0.0;
    out.svr = rd ? e.psi_0 * e.psi_1 * std::pow(c.i_kappa, e.psi_1 - 1.0) *
                       std::exp(e.psi_1 * (s.log_k - s.log_kappa)) * ve.v_x * muc_inv
                 : 0.0;
    return out;
}

}  // namespace climhjb
