#include "climhjb/dgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "climhjb/hjb_detail.hpp"

namespace climhjb {

TrainConfig TrainConfig::full_preset() {
    TrainConfig c;
    c.epochs = 250000;
    c.batch = 32;
    c.lr_value = 1e-4;
    c.lr_policy = 1e-4;
    c.loss_target = 1e-4;
    return c;
}

TrainConfig TrainConfig::desk_preset() {
    TrainConfig c;
    c.epochs = 20000;
    c.batch = 256;
    c.lr_value = 1e-3;
    c.lr_policy = 1e-3;
    c.staged_lr = true;
    c.loss_target = 1e-3;
    return c;
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, double(t));
    const double c2 = 1.0 - std::pow(beta2, double(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

double clip_gradient(std::vector<double>& grad, double max_norm) {
    double n2 = 0;
    for (double g : grad) n2 += g * g;
    double n = std::sqrt(n2);
    if (n > max_norm && n > 0) {
        double s = max_norm / n;
        for (double& g : grad) g *= s;
    }
    return n;
}

std::vector<double> sample_batch(const std::vector<std::pair<double, double>>& box,
                                 int n, std::uint64_t seed) {
    Rng rng(seed);
    const int dims = (int)box.size();
    std::vector<double> out(std::size_t(dims) * n);
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < dims; ++d)
            out[std::size_t(d) * n + b] = rng.uniform(box[d].first, box[d].second);
    return out;
}

// ---------------------------------------------------------------------------
// net construction
// ---------------------------------------------------------------------------

namespace {

int pseudo_count(JumpState::Phase phase, bool pseudo) {
    if (!pseudo) return 0;
    switch (phase) {
        case JumpState::Phase::PostBoth: return 2;    // gamma3, a_g^j
        case JumpState::Phase::PostTech: return 1;    // a_g^j
        case JumpState::Phase::PostDamage: return 1;  // gamma3
        case JumpState::Phase::PreBoth: return 0;
    }
    return 0;
}

bool has_gamma3_input(JumpState::Phase phase, bool pseudo) {
    return pseudo && (phase == JumpState::Phase::PostBoth ||
                      phase == JumpState::Phase::PostDamage);
}

bool has_agj_input(JumpState::Phase phase, bool pseudo) {
    return pseudo && (phase == JumpState::Phase::PostBoth ||
                      phase == JumpState::Phase::PostTech);
}

void push_norm(MlpSpec& s, double lo, double hi) {
    s.in_shift.push_back(0.5 * (lo + hi));
    s.in_scale.push_back(hi - lo > 1e-12 ? 2.0 / (hi - lo) : 1.0);
}

std::pair<MlpSpec, MlpSpec> net_specs(JumpState::Phase phase, bool pseudo,
                                      const NetArch& arch, const ModelParams& p,
                                      const Domain& dom) {
    const int ns = (phase == JumpState::Phase::PreBoth ||
                    phase == JumpState::Phase::PostDamage)
                       ? 4
                       : 3;
    MlpSpec v;
    v.hidden_layers = arch.hidden_layers;
    v.hidden_width = arch.hidden_width;
    v.input_dim = ns + pseudo_count(phase, pseudo);
    v.outputs = {{MlpSpec::Act::Identity, 0, 1}};
    for (int d = 0; d < ns; ++d) push_norm(v, dom.lo[d], dom.hi[d]);
    if (has_gamma3_input(phase, pseudo))
        push_norm(v, p.climate.gamma_3.front(), p.climate.gamma_3.back());
    if (has_agj_input(phase, pseudo))
        push_norm(v, p.econ.a_g_post.front(), p.econ.a_g_post.back());

    MlpSpec pol = v;
    pol.outputs.clear();
    pol.outputs.push_back({MlpSpec::Act::ScaledTanh, arch.invest_lo, arch.invest_hi});
    pol.outputs.push_back({MlpSpec::Act::ScaledTanh, arch.invest_lo, arch.invest_hi});
    const bool rd = phase == JumpState::Phase::PreBoth ||
                    phase == JumpState::Phase::PostDamage;
    if (rd) pol.outputs.push_back({MlpSpec::Act::Sigmoid, 0.0, arch.rd_cap});
    return {v, pol};
}

/// Zeroes the policy head and sets biases so the initial policy is a feasible
/// constant: investments at the interval midpoint, R&D near 1% of capital.
void init_policy_head(Mlp& net) {
    std::vector<double>& w = net.W.back();
    std::fill(w.begin(), w.end(), 0.0);
    std::vector<double>& b = net.b.back();
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = net.spec.outputs[i].act == MlpSpec::Act::Sigmoid ? -4.6 : 0.0;
}

}  // namespace

int NetField::n_inputs() const { return n_state() + pseudo_count(phase, pseudo_inputs); }

void NetField::build_input(const State& s, double* x) const {
    x[0] = s.log_k;
    x[1] = s.r;
    x[2] = s.y_hat;
    int d = 3;
    if (n_state() == 4) x[d++] = s.log_kappa;
    if (has_gamma3_input(phase, pseudo_inputs))
        x[d++] = gamma3_effective(params.climate, s.jump);
    if (has_agj_input(phase, pseudo_inputs)) x[d++] = a_g_effective(params.econ, s.jump);
    if (!pseudo_inputs) {
        if (s.jump.damage_realized() && fixed_m >= 0 && s.jump.m != fixed_m)
            throw SolveError("field was trained for a different damage outcome");
        if (s.jump.tech_realized() && fixed_j >= 0 && s.jump.j != fixed_j)
            throw SolveError("field was trained for a different technology outcome");
    }
}

ValueEval NetField::eval(const State& s) const {
    std::vector<double> x(n_inputs());
    build_input(s, x.data());
    ValueEval e = mlp_value_eval(value_net, x.data(), n_state());
    e.has_kappa = n_state() == 4;
    return e;
}

double NetField::value(const State& s) const {
    std::vector<double> x(n_inputs());
    build_input(s, x.data());
    double out;
    value_net.forward(x.data(), &out);
    return out;
}

Controls NetField::policy(const State& s) const {
    std::vector<double> x(n_inputs());
    build_input(s, x.data());
    double out[3] = {0, 0, 0};
    policy_net.forward(x.data(), out);
    Controls c;
    c.i_d = out[0];
    c.i_g = out[1];
    c.i_kappa = has_rd() ? out[2] : 0.0;
    return c;
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

namespace {

struct Batch {
    int B = 0;
    std::vector<double> xraw;    // [n_inputs x B], dimension-major
    std::vector<double> xnorm;   // normalized copy
    std::vector<int> midx;       // damage outcome per sample (-1 when n/a)
    std::vector<int> jidx;       // tech outcome per sample (-1 when n/a)
    std::vector<double> tech_cont;    // [J x B] continuation values
    std::vector<double> damage_cont;  // [M x B]
};

struct Trainer {
    NetField& nf;
    const Continuations& cont;
    const UncertaintyConfig& xi;
    const TrainConfig& cfg;
    const ModelParams& p;
    Rng rng;
    tape::Graph g;
    Batch bt;
    TrainResult* result;

    const bool tech_pending;
    const bool damage_pending;

    Trainer(NetField& nf_, const Continuations& cont_, const UncertaintyConfig& xi_,
            const TrainConfig& cfg_, TrainResult* result_)
        : nf(nf_), cont(cont_), xi(xi_), cfg(cfg_), p(nf_.params),
          result(result_),
          tech_pending(!JumpState{nf_.phase, 0, 0}.tech_realized()),
          damage_pending(!JumpState{nf_.phase, 0, 0}.damage_realized()) {
        if (tech_pending && !cont.tech_value)
            throw SolveError("training needs technology continuation values");
        if (damage_pending && !cont.damage_value)
            throw SolveError("training needs damage continuation values");
        rng.deserialize(nf.rng_state);
    }

    JumpState sample_jump(int b) const {
        const int m = bt.midx[b], j = bt.jidx[b];
        switch (nf.phase) {
            case JumpState::Phase::PostBoth: return JumpState::post_both(m, j);
            case JumpState::Phase::PostTech: return JumpState::post_tech(j);
            case JumpState::Phase::PostDamage: return JumpState::post_damage(m);
            case JumpState::Phase::PreBoth: return JumpState::pre_both();
        }
        return JumpState::pre_both();
    }

    void fill_batch() {
        const int B = cfg.batch;
        const int ni = nf.n_inputs();
        const int ns = nf.n_state();
        bt.B = B;
        bt.xraw.assign(std::size_t(ni) * B, 0.0);
        bt.midx.assign(B, nf.pseudo_inputs ? -1 : nf.fixed_m);
        bt.jidx.assign(B, nf.pseudo_inputs ? -1 : nf.fixed_j);

        const Domain& dom = cfg.domain;
        for (int b = 0; b < B; ++b) {
            for (int d = 0; d < ns; ++d) {
                double x;
                if (d == 2) {
                    double sel = rng.next_double();
                    double u = rng.next_double();
                    if (sel < cfg.y_tilt) {
                        double yl = std::max(dom.lo[2], p.climate.y_lower);
                        double yh = std::min(dom.hi[2], p.climate.y_upper);
                        x = yl + (yh - yl) * u;
                    } else {
                        x = dom.lo[2] + (dom.hi[2] - dom.lo[2]) * u;
                    }
                } else {
                    x = rng.uniform(dom.lo[d], dom.hi[d]);
                }
                bt.xraw[std::size_t(d) * B + b] = x;
            }
            int d = ns;
            if (has_gamma3_input(nf.phase, nf.pseudo_inputs)) {
                int m = (int)rng.next_below(p.n_damage());
                bt.midx[b] = m;
                bt.xraw[std::size_t(d++) * B + b] = p.climate.gamma_3[m];
            }
            if (has_agj_input(nf.phase, nf.pseudo_inputs)) {
                int j = (int)rng.next_below(p.n_tech());
                bt.jidx[b] = j;
                bt.xraw[std::size_t(d++) * B + b] = p.econ.a_g_post[j];
            }
        }

        // continuation values for pending jumps
        if (tech_pending) {
            const int J = p.n_tech();
            bt.tech_cont.assign(std::size_t(J) * B, 0.0);
            for (int b = 0; b < B; ++b) {
                State s = sample_state(b);
                for (int j = 0; j < J; ++j) {
                    s.jump = nf.phase == JumpState::Phase::PreBoth
                                 ? JumpState::post_tech(j)
                                 : JumpState::post_both(bt.midx[b], j);
                    bt.tech_cont[std::size_t(j) * B + b] = cont.tech_value(s);
                }
            }
        }
        if (damage_pending) {
            const int M = p.n_damage();
            bt.damage_cont.assign(std::size_t(M) * B, 0.0);
            for (int b = 0; b < B; ++b) {
                State s = sample_state(b);
                for (int m = 0; m < M; ++m) {
                    s.jump = nf.phase == JumpState::Phase::PreBoth
                                 ? JumpState::post_damage(m)
                                 : JumpState::post_both(m, bt.jidx[b]);
                    bt.damage_cont[std::size_t(m) * B + b] = cont.damage_value(s);
                }
            }
        }

        bt.xnorm = bt.xraw;
        normalize_batch(nf.value_net.spec, bt.xnorm, B);
    }

    State sample_state(int b) const {
        State s;
        const int B = bt.B;
        s.log_k = bt.xraw[0 * B + b];
        s.r = bt.xraw[1 * B + b];
        s.y_hat = bt.xraw[2 * B + b];
        s.log_kappa = nf.n_state() == 4 ? bt.xraw[3 * std::size_t(B) + b] : 0.0;
        s.jump = sample_jump(b);
        return s;
    }

    /// Builds the shared loss graph and returns (L_value, L_policy).
    std::pair<tape::Var, tape::Var> build_losses(const TapeNet& tnv, const TapeNet& tnp,
                                                 ClampStats& stats) {
        const int B = bt.B;
        const int ns = nf.n_state();
        tape::Var xn = g.input(bt.xnorm.data(), nf.n_inputs(), B);

        TapeValueEval tve = tape_value_eval(g, tnv, nf.value_net.spec, xn, ns);
        std::vector<tape::Var> pol = tape_policy_forward(g, tnp, nf.policy_net.spec, xn);

        auto raw_row = [&](int d) {
            return g.input(bt.xraw.data() + std::size_t(d) * B, 1, B);
        };

        detail::HjbPointT<tape::Var> pt;
        pt.log_k = raw_row(0);
        pt.r = raw_row(1);
        pt.y_hat = raw_row(2);
        pt.has_kappa = ns == 4;
        if (ns == 4) pt.log_kappa = raw_row(3);
        pt.damage_realized = !damage_pending;

        int d = ns;
        if (has_gamma3_input(nf.phase, nf.pseudo_inputs))
            pt.gamma3 = raw_row(d++);
        else if (!damage_pending)
            pt.gamma3 = g.constant_fill(p.climate.gamma_3[nf.fixed_m], 1, B);
        if (has_agj_input(nf.phase, nf.pseudo_inputs))
            pt.a_g_eff = raw_row(d++);
        else
            pt.a_g_eff = g.constant_fill(
                a_g_effective(p.econ, JumpState{nf.phase, nf.fixed_m, nf.fixed_j}), 1, B);

        detail::ValueEvalT<tape::Var> ve;
        ve.v = tve.v;
        ve.v_k = tve.d1[0];
        ve.v_r = tve.d1[1];
        ve.v_y = tve.d1[2];
        ve.v_kk = tve.v_kk;
        ve.v_rr = tve.v_rr;
        ve.v_yy = tve.v_yy;
        ve.v_kr = tve.v_kr;
        if (ns == 4) {
            ve.v_x = tve.d1[3];
            ve.v_xx = tve.v_xx;
        }

        detail::ControlsT<tape::Var> ctl;
        ctl.i_d = pol[0];
        ctl.i_g = pol[1];
        ctl.i_kappa = nf.has_rd() ? pol[2] : g.constant_fill(0.0, 1, B);

        detail::JumpContT<tape::Var> jc;
        if (tech_pending) {
            jc.tech_priors = p.econ.pi_tech;
            for (int j = 0; j < p.n_tech(); ++j)
                jc.tech_values.push_back(
                    g.input(bt.tech_cont.data() + std::size_t(j) * B, 1, B));
        }
        if (damage_pending) {
            jc.damage_priors = p.climate.pi_damage;
            for (int m = 0; m < p.n_damage(); ++m)
                jc.damage_values.push_back(
                    g.input(bt.damage_cont.data() + std::size_t(m) * B, 1, B));
        }

        long long caps = 0;
        auto dist = detail::min_foc_t(pt, ve, jc, xi, p, &caps);
        stats.exp_cap += caps;

        tape::Var rhs = detail::hjb_rhs_t(pt, ve, ctl, dist, jc, xi, p, &stats);
        tape::Var residual = g.sub(rhs, g.scale(ve.v, p.econ.delta));
        tape::Var lv = g.mean_all(g.square_op(residual));
        tape::Var lp = g.neg(g.mean_all(rhs));
        return {lv, lp};
    }

    double lr_mult(long long epoch, long long total) const {
        if (!cfg.staged_lr) return 1.0;
        double f = double(epoch) / double(std::max<long long>(total, 1));
        return f < 0.5 ? 1.0 : (f < 0.8 ? 0.3 : 0.1);
    }

    void pretrain() {
        if (cfg.pretrain_epochs <= 0) return;
        Adam opt;
        opt.beta1 = cfg.adam_beta1;
        opt.beta2 = cfg.adam_beta2;
        opt.eps = cfg.adam_eps;
        opt.init(nf.value_net.param_count());
        std::vector<double> flat, grad, target;
        for (long long e = 0; e < cfg.pretrain_epochs; ++e) {
            fill_batch();
            const int B = bt.B;
            target.resize(B);
            for (int b = 0; b < B; ++b) {
                State s = sample_state(b);
                double a_g = a_g_effective(p.econ, s.jump);
                double c0 = p.econ.A_d * (1.0 - s.r) + a_g * s.r;
                target[b] = std::log(c0) + s.log_k;
            }
            g.clear();
            TapeNet tnv = tape_register(g, nf.value_net);
            tape::Var xn = g.input(bt.xnorm.data(), nf.n_inputs(), B);
            tape::Var v = tape_value_forward(g, tnv, nf.value_net.spec, xn);
            tape::Var t = g.input(target.data(), 1, B);
            tape::Var loss = g.mean_all(g.square_op(g.sub(v, t)));
            g.backward(loss);
            tape_collect_grads(g, tnv, grad);
            clip_gradient(grad, cfg.grad_clip);
            nf.value_net.flatten(flat);
            opt.step(flat, grad, 1e-3);
            nf.value_net.unflatten(flat.data());
        }
    }

    void run(long long target_epochs) {
        std::vector<double> vflat, pflat, vgrad, pgrad;
        ClampStats clamps;
        std::vector<double>& lv_hist = result ? result->loss_value : scratch_lv_;
        std::vector<double>& lp_hist = result ? result->loss_policy : scratch_lp_;

        auto smoothed = [&](long long upto) {
            long long w = std::min<long long>(cfg.loss_window, upto);
            if (w <= 0) return 0.0;
            double s = 0;
            for (long long i = upto - w; i < upto; ++i) s += lv_hist[i];
            return s / double(w);
        };

        for (long long e = nf.epoch_done; e < target_epochs; ++e) {
            fill_batch();
            g.clear();
            TapeNet tnv = tape_register(g, nf.value_net);
            TapeNet tnp = tape_register(g, nf.policy_net);
            ClampStats step_stats;
            auto [lv, lp] = build_losses(tnv, tnp, step_stats);
            clamps += step_stats;

            const double lv_val = g.scalar(lv);
            const double lp_val = g.scalar(lp);
            lv_hist.push_back(lv_val);
            lp_hist.push_back(lp_val);

            if (!std::isfinite(lv_val) || !std::isfinite(lp_val)) {
                checkpoint(e);
                throw SolveError("training loss diverged (non-finite) at epoch " +
                                 std::to_string(e));
            }
            long long done = (long long)lv_hist.size();
            if (done > 2 * cfg.loss_window + 1000 && done % 250 == 0) {
                double now = smoothed(done), before = smoothed(done - 1000);
                if (before > 0 && now > 10.0 * before) {
                    checkpoint(e);
                    throw SolveError("training loss grew 10x over 1000 epochs");
                }
            }

            g.backward(lv);
            tape_collect_grads(g, tnv, vgrad);
            g.backward(lp);
            tape_collect_grads(g, tnp, pgrad);
            clip_gradient(vgrad, cfg.grad_clip);
            clip_gradient(pgrad, cfg.grad_clip);

            const double mult = lr_mult(e, target_epochs);
            nf.value_net.flatten(vflat);
            nf.adam_value.step(vflat, vgrad, cfg.lr_value * mult);
            nf.value_net.unflatten(vflat.data());

            nf.policy_net.flatten(pflat);
            nf.adam_policy.step(pflat, pgrad, cfg.lr_policy * mult);
            nf.policy_net.unflatten(pflat.data());

            nf.epoch_done = e + 1;
            if (cfg.checkpoint_every > 0 && (e + 1) % cfg.checkpoint_every == 0)
                checkpoint(e + 1);
            if (cfg.verbose && (e + 1) % 1000 == 0)
                std::fprintf(stderr, "  dgm[%d] epoch %lld  L_V=%.3e  smoothed=%.3e\n",
                             (int)nf.phase, (long long)(e + 1), lv_val,
                             smoothed((long long)lv_hist.size()));
        }

        nf.rng_state = rng.serialize();
        if (result) {
            result->clamps = clamps;
            result->epochs_run = target_epochs;
            result->smoothed_final = smoothed((long long)lv_hist.size());
        }
    }

    void checkpoint(long long epoch) {
        if (cfg.checkpoint_path.empty()) return;
        nf.epoch_done = epoch;
        nf.rng_state = rng.serialize();
        nf.save(cfg.checkpoint_path);
    }

    std::vector<double> scratch_lv_, scratch_lp_;
};

}  // namespace

NetField train_state(const JumpState& js, bool pseudo_inputs, const Continuations& cont,
                     const UncertaintyConfig& xi, const NetArch& arch,
                     const TrainConfig& cfg, const ModelParams& p,
                     TrainResult* result) {
    p.validate();
    NetField nf;
    nf.phase = js.phase;
    nf.pseudo_inputs = pseudo_inputs;
    nf.fixed_m = pseudo_inputs ? -1 : js.m;
    nf.fixed_j = pseudo_inputs ? -1 : js.j;
    nf.params = p;
    nf.param_hash = p.hash();
    nf.seed = cfg.seed;
    if (!pseudo_inputs) {
        if (js.damage_realized() && (js.m < 0 || js.m >= p.n_damage()))
            throw ConfigError("fixed damage outcome out of range");
        if (js.tech_realized() && (js.j < 0 || js.j >= p.n_tech()))
            throw ConfigError("fixed technology outcome out of range");
    }

    auto [vspec, pspec] = net_specs(js.phase, pseudo_inputs, arch, p, cfg.domain);
    Rng init_rng(cfg.seed);
    nf.value_net.spec = vspec;
    nf.value_net.init(init_rng);
    nf.policy_net.spec = pspec;
    nf.policy_net.init(init_rng);
    init_policy_head(nf.policy_net);
    nf.rng_state = init_rng.serialize();
    nf.adam_value.beta1 = cfg.adam_beta1;
    nf.adam_value.beta2 = cfg.adam_beta2;
    nf.adam_value.eps = cfg.adam_eps;
    nf.adam_value.init(nf.value_net.param_count());
    nf.adam_policy = nf.adam_value;
    nf.adam_policy.init(nf.policy_net.param_count());

    if (cfg.epochs == 0) {
        if (result) *result = TrainResult{};
        return nf;  // untouched nets, empty loss history
    }

    Trainer tr(nf, cont, xi, cfg, result);
    tr.pretrain();
    nf.rng_state = tr.rng.serialize();
    tr.run(cfg.epochs);
    return nf;
}

NetField resume_training(NetField field, const Continuations& cont,
                         const UncertaintyConfig& xi, const TrainConfig& cfg,
                         TrainResult* result) {
    Trainer tr(field, cont, xi, cfg, result);
    tr.run(cfg.epochs);
    return field;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

namespace {

const char* phase_name(JumpState::Phase ph) {
    switch (ph) {
        case JumpState::Phase::PreBoth: return "preboth";
        case JumpState::Phase::PostTech: return "posttech";
        case JumpState::Phase::PostDamage: return "postdamage";
        case JumpState::Phase::PostBoth: return "postboth";
    }
    return "?";
}

JumpState::Phase phase_from(const std::string& s) {
    if (s == "preboth") return JumpState::Phase::PreBoth;
    if (s == "posttech") return JumpState::Phase::PostTech;
    if (s == "postdamage") return JumpState::Phase::PostDamage;
    if (s == "postboth") return JumpState::Phase::PostBoth;
    throw IoError("bad phase tag: " + s);
}

void write_block(std::ofstream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             std::streamsize(v.size() * sizeof(double)));
}

void read_block(std::ifstream& is, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
    if (is.gcount() != std::streamsize(n * sizeof(double)))
        throw IoError("truncated checkpoint payload");
}

}  // namespace

void NetField::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "NETCKPT1\n";
    os << "phase=" << phase_name(phase) << "\n";
    os << "pseudo=" << (pseudo_inputs ? 1 : 0) << "\n";
    os << "fixed_m=" << fixed_m << "\n";
    os << "fixed_j=" << fixed_j << "\n";
    os << "param_hash=" << param_hash << "\n";
    os << "seed=" << seed << "\n";
    os << "epoch=" << epoch_done << "\n";
    os << "adam_t_value=" << adam_value.t << "\n";
    os << "adam_t_policy=" << adam_policy.t << "\n";
    os << "rng=" << rng_state << "\n";
    os << "vspec=" << value_net.spec.describe() << "\n";
    os << "pspec=" << policy_net.spec.describe() << "\n";
    os << "weights_hash=" << value_net.weight_hash() << "\n";
    os << "data\n";
    std::vector<double> flat;
    value_net.flatten(flat);
    write_block(os, flat);
    policy_net.flatten(flat);
    write_block(os, flat);
    write_block(os, adam_value.m);
    write_block(os, adam_value.v);
    write_block(os, adam_policy.m);
    write_block(os, adam_policy.v);
    if (!os) throw IoError("write failed: " + path);
}

NetField NetField::load(const std::string& path, const ModelParams& p) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "NETCKPT1")
        throw IoError("not a network checkpoint: " + path);
    auto need = [&](const char* key) {
        if (!std::getline(is, line)) throw IoError("truncated header: " + path);
        std::string prefix = std::string(key) + "=";
        if (line.rfind(prefix, 0) != 0)
            throw IoError("expected '" + prefix + "' in " + path);
        return line.substr(prefix.size());
    };
    NetField nf;
    nf.phase = phase_from(need("phase"));
    nf.pseudo_inputs = need("pseudo") == "1";
    nf.fixed_m = std::stoi(need("fixed_m"));
    nf.fixed_j = std::stoi(need("fixed_j"));
    nf.param_hash = need("param_hash");
    nf.seed = std::stoull(need("seed"));
    nf.epoch_done = std::stoll(need("epoch"));
    long long tv = std::stoll(need("adam_t_value"));
    long long tp = std::stoll(need("adam_t_policy"));
    nf.rng_state = need("rng");
    nf.value_net.spec = MlpSpec::parse(need("vspec"));
    nf.policy_net.spec = MlpSpec::parse(need("pspec"));
    std::string stored_hash = need("weights_hash");
    if (!std::getline(is, line) || line != "data") throw IoError("missing data marker");

    if (nf.param_hash != p.hash())
        throw IoError("checkpoint parameter hash does not match supplied parameters");
    nf.params = p;

    Rng dummy(0);
    nf.value_net.init(dummy);  // allocate layer shapes
    nf.policy_net.init(dummy);
    std::vector<double> flat;
    read_block(is, flat, nf.value_net.param_count());
    nf.value_net.unflatten(flat.data());
    read_block(is, flat, nf.policy_net.param_count());
    nf.policy_net.unflatten(flat.data());
    nf.adam_value.t = tv;
    nf.adam_policy.t = tp;
    read_block(is, nf.adam_value.m, nf.value_net.param_count());
    read_block(is, nf.adam_value.v, nf.value_net.param_count());
    read_block(is, nf.adam_policy.m, nf.policy_net.param_count());
    read_block(is, nf.adam_policy.v, nf.policy_net.param_count());
    if (nf.value_net.weight_hash() != stored_hash)
        throw IoError("checkpoint weight hash mismatch: " + path);
    return nf;
}

}  // namespace climhjb
