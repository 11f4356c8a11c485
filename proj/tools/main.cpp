// Command-line driver for the climate-economics HJB pipeline: finite-difference
// reference solves, neural network training, pathway simulation, validation,
// and shadow-price evaluation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "climhjb/dgm.hpp"
#include "climhjb/fd_solver.hpp"
#include "climhjb/grid.hpp"
#include "climhjb/io.hpp"
#include "climhjb/simulate.hpp"
#include "climhjb/valuation.hpp"

using namespace climhjb;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::string xi_arg;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool desk_scale = false;
};

RunConfig make_config(const CommonArgs& a) {
    RunConfig cfg =
        a.config_path.empty() ? RunConfig::defaults() : load_config(a.config_path);
    if (!a.preset.empty()) {
        cfg.preset = a.preset;
        cfg.apply_preset();
    }
    if (a.desk_scale) cfg.apply_desk_scale();
    if (a.seed_set) cfg.seed = a.seed;
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    if (!a.xi_arg.empty()) {
        cfg.xi_list.clear();
        std::istringstream ss(a.xi_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.xi_list.push_back(parse_xi(tok));
        if (!cfg.xi_list.empty())
            cfg.xi = apply_drift_mask(cfg.drift_channels, cfg.xi_list.front());
    }
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

std::string fd_field_path(const RunConfig& cfg, const JumpState& js) {
    return cfg.out_dir + "/fd_" + js.tag() + "_" + uncertainty_tag(cfg.xi) + ".field";
}

std::string nn_ckpt_path(const RunConfig& cfg, const std::string& phase, const Xi& xi) {
    return cfg.out_dir + "/nn_" + phase + "_" + xi_label(xi) + ".ckpt";
}

int cmd_solve_fd(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    Manifest manifest(cfg.out_dir + "/fd_manifest.txt");
    const int M = cfg.params.n_damage(), J = cfg.params.n_tech();

    for (int j = 0; j < J; ++j) {
        std::vector<GridField> post_both;
        post_both.reserve(M);
        for (int m = 0; m < M; ++m) {
            FdReport rep;
            GridField f = solve_postjump(JumpState::post_both(m, j), cfg.grid, cfg.xi,
                                         cfg.params, {}, FdOptions{}, &rep);
            std::string path = fd_field_path(cfg, f.jump());
            f.save(path);
            std::ostringstream notes;
            notes << "steps=" << rep.steps
                  << " residual_median_ratio=" << fmt_g17(rep.residual_median_ratio);
            manifest.add(path, notes.str());
            std::printf("solved %-22s steps=%-4d median|L v|/|delta v|=%.3e\n",
                        f.jump().tag().c_str(), rep.steps, rep.residual_median_ratio);
            post_both.push_back(std::move(f));
        }
        std::vector<const GridField*> cont;
        for (const GridField& f : post_both) cont.push_back(&f);
        FdReport rep;
        GridField f = solve_postjump(JumpState::post_tech(j), cfg.grid, cfg.xi,
                                     cfg.params, cont, FdOptions{}, &rep);
        std::string path = fd_field_path(cfg, f.jump());
        f.save(path);
        std::ostringstream notes;
        notes << "steps=" << rep.steps
              << " residual_median_ratio=" << fmt_g17(rep.residual_median_ratio);
        manifest.add(path, notes.str());
        std::printf("solved %-22s steps=%-4d median|L v|/|delta v|=%.3e\n",
                    f.jump().tag().c_str(), rep.steps, rep.residual_median_ratio);
    }
    manifest.write();
    return 0;
}

void write_loss_csv(const std::string& path, const TrainResult& res, int window) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "epoch,loss_value,loss_policy,smoothed_loss_value\n";
    double acc = 0;
    for (std::size_t e = 0; e < res.loss_value.size(); ++e) {
        acc += res.loss_value[e];
        if (e >= (std::size_t)window) acc -= res.loss_value[e - window];
        double smooth = acc / double(std::min<std::size_t>(e + 1, window));
        os << (e + 1) << "," << fmt_g17(res.loss_value[e]) << ","
           << fmt_g17(res.loss_policy[e]) << "," << fmt_g17(smooth) << "\n";
    }
}

int cmd_solve_nn(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    for (const Xi& xi : cfg.xi_list) {
        UncertaintyConfig uc = apply_drift_mask(cfg.drift_channels, xi);
        std::map<std::string, std::shared_ptr<NetField>> nets;

        auto load_or_train = [&](const std::string& phase_name, const JumpState& js,
                                 const Continuations& cont) {
            TrainConfig tc = cfg.train;
            tc.checkpoint_path = nn_ckpt_path(cfg, phase_name, xi);
            TrainResult res;
            NetField nf =
                train_state(js, cfg.pseudo_inputs, cont, uc, cfg.arch, tc, cfg.params, &res);
            nf.save(tc.checkpoint_path);
            write_loss_csv(cfg.out_dir + "/nn_" + phase_name + "_" + xi_label(xi) +
                               "_loss.csv",
                           res, cfg.train.loss_window);
            std::printf("trained %-11s xi=%-8s epochs=%lld smoothed L_V=%.3e%s\n",
                        phase_name.c_str(), xi_label(xi).c_str(), res.epochs_run,
                        res.smoothed_final,
                        res.clamps.any() ? ("  [" + res.clamps.summary() + "]").c_str()
                                         : "");
            nets[phase_name] = std::make_shared<NetField>(std::move(nf));
        };

        for (const std::string& phase : cfg.solve_order) {
            Continuations cont;
            if (phase == "postboth") {
                load_or_train("postboth", JumpState::post_both(0, 0), cont);
            } else if (phase == "posttech") {
                auto pb = nets.at("postboth");
                cont.damage_value = [pb](const State& s) { return pb->value(s); };
                load_or_train("posttech", JumpState::post_tech(0), cont);
            } else if (phase == "postdamage") {
                auto pb = nets.at("postboth");
                cont.tech_value = [pb](const State& s) { return pb->value(s); };
                load_or_train("postdamage", JumpState::post_damage(0), cont);
            } else {  // preboth
                auto pt = nets.at("posttech");
                auto pd = nets.at("postdamage");
                cont.tech_value = [pt](const State& s) { return pt->value(s); };
                cont.damage_value = [pd](const State& s) { return pd->value(s); };
                load_or_train("preboth", JumpState::pre_both(), cont);
            }
        }
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    BetaEnsemble ensemble = cfg.beta_ensemble_file.empty()
                                ? synthetic_beta_ensemble()
                                : load_beta_ensemble(cfg.beta_ensemble_file);
    if (cfg.beta_ensemble_file.empty())
        save_beta_ensemble(cfg.out_dir + "/beta_ensemble_used.csv", ensemble,
                           "synthetic placeholder ensemble (mean pinned to 1.86)");

    struct Run {
        Xi xi;
        Trajectory traj;
    };
    std::vector<Run> runs;
    const double hist_year = std::min(40.0, cfg.sim_horizon);

    for (const Xi& xi : cfg.xi_list) {
        UncertaintyConfig uc = apply_drift_mask(cfg.drift_channels, xi);
        auto pre = std::make_shared<NetField>(
            NetField::load(nn_ckpt_path(cfg, "preboth", xi), cfg.params));
        auto pt = std::make_shared<NetField>(
            NetField::load(nn_ckpt_path(cfg, "posttech", xi), cfg.params));
        auto pd = std::make_shared<NetField>(
            NetField::load(nn_ckpt_path(cfg, "postdamage", xi), cfg.params));

        PathwayInputs in;
        in.field = pre.get();
        in.tech_value = [pt](const State& s) { return pt->value(s); };
        in.damage_value = [pd](const State& s) { return pd->value(s); };

        Trajectory traj = simulate(in, cfg.initial_state, uc, cfg.sim_horizon,
                                   cfg.sim_dt, cfg.params, cfg.domain);
        traj.to_csv(cfg.out_dir + "/trajectory_" + xi_label(xi) + ".csv");

        auto dmg = distorted_damage_histogram(traj, hist_year, cfg.params);
        write_histogram_csv(cfg.out_dir + "/hist_damage_" + xi_label(xi) + ".csv",
                            cfg.params.climate.pi_damage, dmg);
        auto cli = distorted_climate_histogram(traj, hist_year, ensemble, xi, cfg.params);
        write_histogram_csv(cfg.out_dir + "/hist_climate_" + xi_label(xi) + ".csv",
                            ensemble.prior, cli);
        runs.push_back({xi, std::move(traj)});
    }

    std::ofstream sum(cfg.out_dir + "/simulate_summary.txt");
    for (const Run& r : runs) {
        int end = (int)r.traj.size() - 1;
        int i40 = r.traj.index_at_year(hist_year);
        sum << "xi=" << xi_label(r.xi)
            << " rd_output_ratio_t0=" << fmt_g17(r.traj.rd_output_ratio[0])
            << " emissions_t0=" << fmt_g17(r.traj.emissions_gtc[0])
            << " emissions_end=" << fmt_g17(r.traj.emissions_gtc[end])
            << " p_tech_base_y40=" << fmt_g17(r.traj.p_tech_base[i40])
            << " p_tech_distorted_y40=" << fmt_g17(r.traj.p_tech_distorted[i40])
            << " p_damage_distorted_y40=" << fmt_g17(r.traj.p_damage_distorted[i40])
            << "\n";
    }
    if (runs.size() >= 2) {
        int end = (int)runs[0].traj.size() - 1;
        sum << "emissions_gap_end=" << fmt_g17(runs[0].traj.emissions_gtc[end] -
                                               runs[1].traj.emissions_gtc[end])
            << " rd_gap_t0=" << fmt_g17(runs[0].traj.rd_output_ratio[0] -
                                        runs[1].traj.rd_output_ratio[0])
            << "\n";
    }
    return 0;
}

int cmd_validate(const RunConfig& cfg, int vm, int vj, const std::string& fd_file,
                 const std::string& nn_file) {
    std::string fd_path = fd_file.empty()
                              ? fd_field_path(cfg, JumpState::post_both(vm, vj))
                              : fd_file;
    const Xi scenario = cfg.xi_list.empty() ? Xi::make_neutral() : cfg.xi_list.front();
    std::string nn_path =
        nn_file.empty() ? nn_ckpt_path(cfg, "postboth", scenario) : nn_file;

    GridField fd = GridField::load(fd_path);
    NetField nn = NetField::load(nn_path, cfg.params);
    if (fd.param_hash() != nn.param_hash)
        throw IoError("refusing to compare artifacts with mismatched parameter hashes");

    bool ok = true;
    std::ofstream rep(cfg.out_dir + "/validation_report.txt");

    // (a) training-loss gate from the stored loss history
    std::string loss_csv =
        cfg.out_dir + "/nn_postboth_" + xi_label(scenario) + "_loss.csv";
    double smoothed = -1;
    {
        std::ifstream is(loss_csv);
        std::string line, last;
        if (is) {
            std::getline(is, line);  // header
            while (std::getline(is, line))
                if (!line.empty()) last = line;
            auto pos = last.rfind(',');
            if (pos != std::string::npos) smoothed = std::stod(last.substr(pos + 1));
        }
    }
    bool loss_ok = smoothed >= 0 && smoothed <= cfg.train.loss_target;
    ok = ok && loss_ok;
    rep << "loss_target " << (loss_ok ? "pass" : "FAIL") << " smoothed="
        << fmt_g17(smoothed) << " target=" << fmt_g17(cfg.train.loss_target) << "\n";

    // (b) slice comparison at the validation cross-section
    const double slice_logk = 5.5, slice_y = 1.5;
    double max_v_rel = 0, max_i_rel = 0;
    rep << "r,v_fd,v_nn,i_d_fd,i_d_nn,i_g_fd,i_g_nn\n";
    for (double r = 0.05; r <= 0.9501; r += 0.05) {
        State s;
        s.log_k = slice_logk;
        s.r = r;
        s.y_hat = slice_y;
        s.jump = JumpState::post_both(vm, vj);
        ValueEval ef = fd.derivatives_at(s.log_k, s.r, s.y_hat);
        ValueEval en = nn.eval(s);
        Controls cf = max_foc_solve(s, ef, cfg.params);
        Controls cn = nn.policy(s);
        max_v_rel = std::max(max_v_rel, std::abs(en.v - ef.v) / std::abs(ef.v));
        max_i_rel = std::max(max_i_rel, std::abs(cn.i_d - cf.i_d) / std::abs(cf.i_d));
        max_i_rel = std::max(max_i_rel, std::abs(cn.i_g - cf.i_g) / std::abs(cf.i_g));
        rep << fmt_g17(r) << "," << fmt_g17(ef.v) << "," << fmt_g17(en.v) << ","
            << fmt_g17(cf.i_d) << "," << fmt_g17(cn.i_d) << "," << fmt_g17(cf.i_g)
            << "," << fmt_g17(cn.i_g) << "\n";
    }
    bool slice_ok = max_v_rel <= 0.02 && max_i_rel <= 0.05;
    ok = ok && slice_ok;
    rep << "slice " << (slice_ok ? "pass" : "FAIL") << " max_v_rel=" << fmt_g17(max_v_rel)
        << " max_i_rel=" << fmt_g17(max_i_rel) << "\n";

    // (c) autodiff vs central finite differences on the value network
    Rng rng(cfg.seed + 7);
    double max_grad_rel = 0;
    for (int t = 0; t < 20; ++t) {
        State s;
        s.log_k = rng.uniform(4.5, 8.0);
        s.r = rng.uniform(0.1, 0.9);
        s.y_hat = rng.uniform(0.2, 3.8);
        s.jump = JumpState::post_both(vm, vj);
        std::vector<double> x(nn.n_inputs());
        nn.build_input(s, x.data());
        ValueEval e = mlp_value_eval(nn.value_net, x.data(), nn.n_state());
        const double h = 1e-4;
        double d[3] = {e.v_k, e.v_r, e.v_y};
        for (int dim = 0; dim < 3; ++dim) {
            std::vector<double> xp = x, xm = x;
            xp[dim] += h;
            xm[dim] -= h;
            double vp, vmn;
            nn.value_net.forward(xp.data(), &vp);
            nn.value_net.forward(xm.data(), &vmn);
            double fd_d = (vp - vmn) / (2 * h);
            max_grad_rel = std::max(
                max_grad_rel, std::abs(d[dim] - fd_d) / std::max(std::abs(fd_d), 1e-8));
        }
    }
    bool grad_ok = max_grad_rel < 1e-5;
    ok = ok && grad_ok;
    rep << "gradients " << (grad_ok ? "pass" : "FAIL")
        << " max_rel_err=" << fmt_g17(max_grad_rel) << "\n";

    std::printf("validation: loss %s, slice %s (v %.4f%%, i %.4f%%), gradients %s\n",
                loss_ok ? "pass" : "FAIL", slice_ok ? "pass" : "FAIL", 100 * max_v_rel,
                100 * max_i_rel, grad_ok ? "pass" : "FAIL");
    return ok ? 0 : 2;
}

int cmd_valuations(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    for (const Xi& xi : cfg.xi_list) {
        NetField pre = NetField::load(nn_ckpt_path(cfg, "preboth", xi), cfg.params);
        const State& s = cfg.initial_state;
        ValueEval ve = pre.eval(s);
        Controls c = max_foc_solve(s, ve, cfg.params);
        Valuations v = social_valuations(s, ve, c, cfg.params);
        std::string path = cfg.out_dir + "/valuations_" + xi_label(xi) + ".csv";
        std::ofstream os(path);
        os << "xi,scc,svr,svg,svd\n";
        os << xi_label(xi) << "," << fmt_g17(v.scc) << "," << fmt_g17(v.svr) << ","
           << fmt_g17(v.svg) << "," << fmt_g17(v.svd) << "\n";
        std::printf("xi=%-8s SCC=%.4f SVR=%.4f SVG=%.4f SVD=%.4f\n",
                    xi_label(xi).c_str(), v.scc, v.svr, v.svg, v.svd);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"climate-economics-innovation HJB pipeline"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "configuration file (.cfg or .json)");
    app.add_option("--preset", common.preset, "parameter preset name");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--xi", common.xi_arg, "comma list of penalties, e.g. 0.1,neutral");
    auto* seed_opt = app.add_option("--seed", common.seed, "random seed");
    app.add_flag("--desk-scale", common.desk_scale, "use the CPU-scale training preset");

    auto* fd = app.add_subcommand("solve-fd", "finite-difference post-jump solves");
    auto* nn = app.add_subcommand("solve-nn", "train the neural value/policy fields");
    auto* sim = app.add_subcommand("simulate", "integrate baseline pathways");
    auto* val = app.add_subcommand("validate", "compare FD and NN solutions");
    auto* shp = app.add_subcommand("valuations", "shadow prices at the initial state");

    int vm = 0, vj = 0;
    std::string fd_file, nn_file;
    val->add_option("--m", vm, "damage outcome index for the comparison");
    val->add_option("--j", vj, "technology outcome index for the comparison");
    val->add_option("--fd-file", fd_file, "explicit field file");
    val->add_option("--nn-file", nn_file, "explicit checkpoint file");

    CLI11_PARSE(app, argc, argv);
    common.seed_set = seed_opt->count() > 0;

    try {
        RunConfig cfg = make_config(common);
        ensure_dir(cfg.out_dir);
        if (fd->parsed()) return cmd_solve_fd(cfg);
        if (nn->parsed()) return cmd_solve_nn(cfg);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (val->parsed()) return cmd_validate(cfg, vm, vj, fd_file, nn_file);
        if (shp->parsed()) return cmd_valuations(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
