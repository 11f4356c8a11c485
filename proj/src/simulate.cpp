#include "climhjb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace climhjb {

namespace {

const char* kCsvHeader =
    "year,log_k,r,y,log_kappa,i_d,i_g,i_kappa,consumption,emissions_gtc,"
    "rd_output_ratio,p_tech_base,p_tech_distorted,p_damage_base,p_damage_distorted,"
    "scc,svr,svg,svd";

struct NodeEval {
    ValueEval ve;
    Controls ctl;
    Distortions dist;
    JumpTermInputs jumps;
    double lam_tech_base = 0, lam_tech_dist = 0;
    double lam_damage_base = 0, lam_damage_dist = 0;
};

}  // namespace

int Trajectory::index_at_year(double year) const {
    if (time.empty()) throw SolveError("empty trajectory");
    if (year < time.front() - 1e-9 || year > time.back() + 1e-9)
        throw SolveError("requested year outside simulated horizon");
    int best = 0;
    for (std::size_t i = 1; i < time.size(); ++i)
        if (std::abs(time[i] - year) < std::abs(time[best] - year)) best = (int)i;
    return best;
}

Trajectory simulate(const PathwayInputs& in, const State& init,
                    const UncertaintyConfig& xi, double horizon_years, double dt,
                    const ModelParams& p, const Domain& box) {
    if (!in.field) throw SolveError("simulate needs a solved value field");
    if (dt <= 0 || dt > 0.1) throw SolveError("simulate needs 0 < dt <= 0.1 yr");
    p.validate();

    const JumpState js = init.jump;
    const bool tech_pending = !js.tech_realized();
    const bool damage_pending = !js.damage_realized();
    if (tech_pending && !in.tech_value)
        throw SolveError("simulate needs technology continuation values");
    if (damage_pending && !in.damage_value)
        throw SolveError("simulate needs damage continuation values");

    auto eval_node = [&](const State& s) {
        NodeEval n;
        n.ve = in.field->eval(s);
        n.ctl = max_foc_solve(s, n.ve, p);
        if (tech_pending) {
            n.jumps.tech_priors = p.econ.pi_tech;
            n.jumps.tech_values.resize(p.n_tech());
            State q = s;
            for (int j = 0; j < p.n_tech(); ++j) {
                q.jump = js.damage_realized() ? JumpState::post_both(js.m, j)
                                              : JumpState::post_tech(j);
                n.jumps.tech_values[j] = in.tech_value(q);
            }
        }
        if (damage_pending) {
            n.jumps.damage_priors = p.climate.pi_damage;
            n.jumps.damage_values.resize(p.n_damage());
            State q = s;
            for (int m = 0; m < p.n_damage(); ++m) {
                q.jump = js.tech_realized() ? JumpState::post_both(m, js.j)
                                            : JumpState::post_damage(m);
                n.jumps.damage_values[m] = in.damage_value(q);
            }
        }
        n.dist = min_foc_distortions(s, n.ve, n.jumps, xi, p);
        auto rates = distorted_intensities(s, n.dist, n.jumps, p);
        n.lam_tech_dist = rates.first;
        n.lam_damage_dist = rates.second;
        auto base = distorted_intensities(
            s, Distortions::neutral(p.n_tech(), p.n_damage()), n.jumps, p);
        n.lam_tech_base = tech_pending ? base.first : 0.0;
        n.lam_damage_base = damage_pending ? base.second : 0.0;
        return n;
    };

    auto drift_at = [&](const State& s) {
        ValueEval ve = in.field->eval(s);
        Controls ctl = max_foc_solve(s, ve, p);
        return drift(s, ctl, nullptr, p);  // baseline probabilities: h = 0
    };

    const int steps = (int)std::llround(horizon_years / dt);
    Trajectory tr;
    State s = init;
    double int_tech_base = 0, int_tech_dist = 0, int_damage_base = 0, int_damage_dist = 0;
    NodeEval prev{};

    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        if (!box.contains(s.log_k, s.r, s.y_hat, s.log_kappa, js.has_kappa())) {
            std::ostringstream os;
            os << "state left the solved box at year " << fmt_g17(t);
            throw SolveError(os.str());
        }
        NodeEval n = eval_node(s);

        if (k > 0) {  // trapezoid accumulation of the arrival intensities
            int_tech_base += 0.5 * dt * (prev.lam_tech_base + n.lam_tech_base);
            int_tech_dist += 0.5 * dt * (prev.lam_tech_dist + n.lam_tech_dist);
            int_damage_base += 0.5 * dt * (prev.lam_damage_base + n.lam_damage_base);
            int_damage_dist += 0.5 * dt * (prev.lam_damage_dist + n.lam_damage_dist);
        }

        tr.time.push_back(t);
        tr.states.push_back(s);
        tr.controls.push_back(n.ctl);
        tr.distortions.push_back(n.dist);
        tr.evals.push_back(n.ve);
        const double cons = consumption(s, n.ctl, p);
        if (cons <= 0) throw SolveError("nonpositive consumption along the path");
        tr.consumption.push_back(cons);
        tr.emissions_gtc.push_back(emissions(s, p));
        const double gross =
            p.econ.A_d * (1.0 - s.r) + a_g_effective(p.econ, s.jump) * s.r;
        tr.rd_output_ratio.push_back(n.ctl.i_kappa / gross);
        tr.p_tech_base.push_back(1.0 - std::exp(-int_tech_base));
        tr.p_tech_distorted.push_back(1.0 - std::exp(-int_tech_dist));
        tr.p_damage_base.push_back(1.0 - std::exp(-int_damage_base));
        tr.p_damage_distorted.push_back(1.0 - std::exp(-int_damage_dist));
        tr.valuations.push_back(social_valuations(s, n.ve, n.ctl, p));
        prev = n;
        if (k == steps) break;

        // classical fourth-order step on (log K, R, y, log kappa)
        auto advance = [&](const State& base, const std::array<double, 4>& mu,
                           double h) {
            State out = base;
            out.log_k += h * mu[0];
            out.r += h * mu[1];
            out.y_hat += h * mu[2];
            if (js.has_kappa()) out.log_kappa += h * mu[3];
            return out;
        };
        auto k1 = drift_at(s);
        auto k2 = drift_at(advance(s, k1, 0.5 * dt));
        auto k3 = drift_at(advance(s, k2, 0.5 * dt));
        auto k4 = drift_at(advance(s, k3, dt));
        std::array<double, 4> mu{};
        for (int d = 0; d < 4; ++d)
            mu[d] = (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]) / 6.0;
        s = advance(s, mu, dt);
    }
    return tr;
}

void Trajectory::to_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for write: " + path);
    os << kCsvHeader << "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        const State& s = states[i];
        const Controls& c = controls[i];
        const Valuations& v = valuations[i];
        const double cols[19] = {
            time[i], s.log_k, s.r, s.y_hat, s.log_kappa, c.i_d, c.i_g, c.i_kappa,
            consumption[i], emissions_gtc[i], rd_output_ratio[i], p_tech_base[i],
            p_tech_distorted[i], p_damage_base[i], p_damage_distorted[i], v.scc,
            v.svr, v.svg, v.svd};
        for (int q = 0; q < 19; ++q) os << (q ? "," : "") << fmt_g17(cols[q]);
        os << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

Trajectory Trajectory::from_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for read: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw IoError("unexpected trajectory header in " + path);
    Trajectory tr;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double cols[19];
        std::string tok;
        for (int q = 0; q < 19; ++q) {
            if (!std::getline(ss, tok, ',')) throw IoError("short row in " + path);
            cols[q] = std::stod(tok);
        }
        tr.time.push_back(cols[0]);
        State s;
        s.log_k = cols[1];
        s.r = cols[2];
        s.y_hat = cols[3];
        s.log_kappa = cols[4];
        tr.states.push_back(s);
        tr.controls.push_back({cols[5], cols[6], cols[7]});
        tr.consumption.push_back(cols[8]);
        tr.emissions_gtc.push_back(cols[9]);
        tr.rd_output_ratio.push_back(cols[10]);
        tr.p_tech_base.push_back(cols[11]);
        tr.p_tech_distorted.push_back(cols[12]);
        tr.p_damage_base.push_back(cols[13]);
        tr.p_damage_distorted.push_back(cols[14]);
        Valuations v;
        v.scc = cols[15];
        v.svr = cols[16];
        v.svg = cols[17];
        v.svd = cols[18];
        tr.valuations.push_back(v);
    }
    return tr;
}

std::vector<double> distorted_damage_histogram(const Trajectory& t, double at_year,
                                               const ModelParams& p) {
    const int i = t.index_at_year(at_year);
    const std::vector<double>& f = t.distortions[i].f;
    std::vector<double> w(p.n_damage());
    double sum = 0;
    for (int m = 0; m < p.n_damage(); ++m) {
        w[m] = p.climate.pi_damage[m] * (f.empty() ? 1.0 : f[m]);
        sum += w[m];
    }
    for (double& x : w) x /= sum;
    return w;
}

std::vector<double> distorted_climate_histogram(const Trajectory& t, double at_year,
                                                const BetaEnsemble& ensemble,
                                                const Xi& xi, const ModelParams& p) {
    if (ensemble.size() == 0) throw SolveError("empty climate-model ensemble");
    const int i = t.index_at_year(at_year);
    if (xi.neutral) return ensemble.prior;

    if (t.evals.size() != t.states.size())
        throw SolveError("trajectory lacks stored derivative evaluations");
    const State& s = t.states[i];
    const ValueEval& ve = t.evals[i];
    const double base =
        -(1.0 / xi.value) * (ve.v_y - damage_slope(s, p)) * emissions(s, p);

    std::vector<double> ex(ensemble.size());
    double emax = -1e300;
    for (std::size_t l = 0; l < ensemble.size(); ++l) {
        ex[l] = base * ensemble.beta[l] * 1e-3;  // betas listed per 1000 GtC
        emax = std::max(emax, ex[l]);
    }
    std::vector<double> w(ensemble.size());
    double sum = 0;
    for (std::size_t l = 0; l < ensemble.size(); ++l) {
        w[l] = ensemble.prior[l] * std::exp(ex[l] - emax);
        sum += w[l];
    }
    for (double& x : w) x /= sum;
    return w;
}

void write_histogram_csv(const std::string& path, const std::vector<double>& priors,
                         const std::vector<double>& weights) {
    if (priors.size() != weights.size()) throw IoError("histogram size mismatch");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "model,prior,distorted_weight\n";
    for (std::size_t i = 0; i < priors.size(); ++i)
        os << i << "," << fmt_g17(priors[i]) << "," << fmt_g17(weights[i]) << "\n";
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace climhjb
