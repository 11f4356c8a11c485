#ifndef CLIMHJB_DGM_HPP
#define CLIMHJB_DGM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "climhjb/hjb.hpp"
#include "climhjb/mlp.hpp"
#include "climhjb/params.hpp"
#include "climhjb/state.hpp"

namespace climhjb {

/// i.i.d. uniform draws over an arbitrary box, dimension-major [dims x n].
/// Deterministic for a fixed seed.
std::vector<double> sample_batch(const std::vector<std::pair<double, double>>& box,
                                 int n, std::uint64_t seed);

/// Architecture knobs shared by the value and policy networks.
struct NetArch {
    int hidden_layers = 4;
    int hidden_width = 32;
    double invest_lo = -0.009;  // bounded-tanh range for i_d, i_g
    double invest_hi = 0.15;
    double rd_cap = 1.0;        // sigmoid upper bound for i_kappa
};

struct TrainConfig {
    long long epochs = 250000;
    int batch = 32;
    double lr_value = 1e-4;
    double lr_policy = 1e-4;
    bool staged_lr = false;     // x1 / x0.3 / x0.1 over (50%, 30%, 20%) of epochs
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 10.0;    // global-norm cap per network
    double loss_target = 1e-4;  // smoothed value-loss goal (reported, not enforced)
    std::uint64_t seed = 0;
    long long pretrain_epochs = 2000;  // supervised warm start toward the
                                       // stationary-consumption guess
    double y_tilt = 0.0;        // fraction of y draws from [y_lower, y_upper]
    int loss_window = 1000;     // trailing-mean smoothing width
    long long checkpoint_every = 0;
    std::string checkpoint_path;
    Domain domain;
    int verbose = 0;

    /// Paper-scale budget (250000 epochs, batch 32, 1e-4 target).
    static TrainConfig full_preset();
    /// CPU-friendly budget used by the validation pipeline.
    static TrainConfig desk_preset();
};

struct Adam {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long t = 0;
    std::vector<double> m, v;

    void init(std::size_t n) {
        t = 0;
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
    void step(std::vector<double>& params, const std::vector<double>& grad, double lr);
};

/// Caps the global norm of a gradient vector; returns the pre-clip norm.
double clip_gradient(std::vector<double>& grad, double max_norm);

/// Continuation-value callbacks for the pending jumps. The passed state's
/// jump field identifies the target outcome (its m or j index); the callback
/// returns the corresponding solved value at that point.
struct Continuations {
    std::function<double(const State&)> tech_value;
    std::function<double(const State&)> damage_value;
};

/// A trained value/policy pair for one jump phase. When `pseudo_inputs` is
/// set, the realized gamma_3 and post-jump productivity enter the networks as
/// extra inputs, so one field covers the whole outcome family; otherwise the
/// field is specific to (fixed_m, fixed_j).
class NetField : public ValueField {
public:
    JumpState::Phase phase = JumpState::Phase::PostBoth;
    bool pseudo_inputs = true;
    int fixed_m = -1, fixed_j = -1;
    Mlp value_net, policy_net;
    ModelParams params;
    std::string param_hash;
    std::uint64_t seed = 0;
    long long epoch_done = 0;
    Adam adam_value, adam_policy;
    std::string rng_state;

    int n_state() const {
        return (phase == JumpState::Phase::PreBoth ||
                phase == JumpState::Phase::PostDamage)
                   ? 4
                   : 3;
    }
    int n_inputs() const;
    bool has_rd() const {
        return phase == JumpState::Phase::PreBoth ||
               phase == JumpState::Phase::PostDamage;
    }

    /// Maps a state (with outcome indices in its jump tag) onto the net input.
    void build_input(const State& s, double* x) const;

    ValueEval eval(const State& s) const override;
    double value(const State& s) const override;
    Controls policy(const State& s) const;

    void save(const std::string& path) const;
    static NetField load(const std::string& path, const ModelParams& p);
};

struct TrainResult {
    std::vector<double> loss_value;   // per epoch
    std::vector<double> loss_policy;  // per epoch
    double smoothed_final = 0.0;
    ClampStats clamps;
    long long epochs_run = 0;
};

/// Alternating-descent training of one jump phase (value loss = mean squared
/// Bellman residual; policy loss = negated mean Bellman right-hand side).
/// `js` fixes the outcome pair when pseudo_inputs is false; only its phase
/// matters otherwise. Continuations must be provided for every pending jump.
NetField train_state(const JumpState& js, bool pseudo_inputs, const Continuations& cont,
                     const UncertaintyConfig& xi, const NetArch& arch,
                     const TrainConfig& cfg, const ModelParams& p,
                     TrainResult* result = nullptr);

/// Continues training from a checkpointed field; identical end state to an
/// uninterrupted run with the same seed and total epoch budget.
NetField resume_training(NetField field, const Continuations& cont,
                         const UncertaintyConfig& xi, const TrainConfig& cfg,
                         TrainResult* result = nullptr);

}  // namespace climhjb

#endif
