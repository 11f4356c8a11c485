#include "climhjb/model.hpp"

#include <cmath>
#include <sstream>

#include "climhjb/model_ops.hpp"

namespace climhjb {

std::string ClampStats::summary() const {
    std::ostringstream os;
    os << "clamps: consumption=" << consumption << " adjustment=" << adjustment
       << " marginal_value=" << marginal_value << " exp_cap=" << exp_cap;
    return os.str();
}

ClampStats& ClampStats::operator+=(const ClampStats& o) {
    consumption += o.consumption;
    adjustment += o.adjustment;
    marginal_value += o.marginal_value;
    exp_cap += o.exp_cap;
    return *this;
}

double damage_intensity(double y, const ClimateParams& c) {
    return ops::damage_intensity_t(y, c);
}

double tech_intensity(double log_kappa, const EconParams& e) {
    return ops::tech_intensity_t(log_kappa, e);
}

double emissions(const State& s, const ModelParams& p) {
    return ops::emissions_t(s.log_k, s.r, p);
}

double damage_slope(const State& s, const ModelParams& p) {
    return ops::damage_slope_t(s.y_hat, gamma3_effective(p.climate, s.jump),
                               s.jump.damage_realized(), p.climate);
}

std::array<double, 4> drift(const State& s, const Controls& c,
                            const std::array<double, 4>* h, const ModelParams& p,
                            ClampStats* stats) {
    const EconParams& e = p.econ;
    if (c.i_kappa < 0) throw SolveError("negative R&D investment ratio");

    long long adj = 0;
    double phi_d = ops::conversion_t(c.i_d, e.alpha_d, e.Gamma_d, e.theta_d,
                                     kAdjustmentFloor, &adj);
    double phi_g = ops::conversion_t(c.i_g, e.alpha_g, e.Gamma_g, e.theta_g,
                                     kAdjustmentFloor, &adj);
    if (adj > 0) {
        if (!stats) throw SolveError("investment ratio drives 1 + theta i below floor");
        stats->adjustment += adj;
    }

    const double r = s.r, om = 1.0 - s.r;
    const double sd2 = sq(e.sigma_d), sg2 = sq(e.sigma_g);
    const double em = ops::emissions_t(s.log_k, s.r, p);

    std::array<double, 4> mu{};
    mu[0] = om * phi_d + r * phi_g - 0.5 * (sd2 * sq(om) + sg2 * sq(r));
    mu[1] = r * om * (phi_g - phi_d + om * sd2 - r * sg2);
    mu[2] = em * p.climate.beta_f;
    mu[3] = s.jump.has_kappa()
                ? -e.zeta + ops::rd_conversion_t(c.i_kappa, s.log_k, s.log_kappa, e) -
                      0.5 * sq(e.sigma_kappa)
                : 0.0;

    if (h) {
        mu[0] += om * e.sigma_d * (*h)[SHOCK_D] + r * e.sigma_g * (*h)[SHOCK_G];
        mu[1] += r * om * (e.sigma_g * (*h)[SHOCK_G] - e.sigma_d * (*h)[SHOCK_D]);
        mu[2] += em * p.climate.varsigma * (*h)[SHOCK_Y];
        if (s.jump.has_kappa()) mu[3] += e.sigma_kappa * (*h)[SHOCK_K];
    }
    return mu;
}

}  // namespace climhjb
