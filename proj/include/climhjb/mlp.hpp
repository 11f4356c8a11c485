#ifndef CLIMHJB_MLP_HPP
#define CLIMHJB_MLP_HPP

#include <array>
#include <string>
#include <vector>

#include "climhjb/common.hpp"
#include "climhjb/state.hpp"
#include "climhjb/tape.hpp"

namespace climhjb {

/// Feedforward net description: tanh hidden stack, per-output final maps.
/// Inputs are affinely normalized, (x - shift) * scale, before the first layer.
struct MlpSpec {
    enum class Act { Identity, ScaledTanh, Sigmoid };
    struct Output {
        Act act = Act::Identity;
        double lo = 0.0, hi = 1.0;  // target interval for the squashing maps
    };

    int input_dim = 4;
    int hidden_layers = 4;
    int hidden_width = 32;
    std::vector<Output> outputs;
    std::vector<double> in_shift, in_scale;

    int output_dim() const { return (int)outputs.size(); }
    void validate() const;
    std::string describe() const;  // single-line form for checkpoint headers
    static MlpSpec parse(const std::string& line);
};

/// Dense weights for an MlpSpec. Layer l maps width(l-1) -> width(l); the
/// last layer is linear into output_dim, followed by the per-output maps.
struct Mlp {
    MlpSpec spec;
    std::vector<std::vector<double>> W;  // row-major [out x in]
    std::vector<std::vector<double>> b;

    void init(Rng& rng);  // symmetric uniform scaled by 1/sqrt(fan_in)
    std::size_t param_count() const;
    void flatten(std::vector<double>& out) const;
    void unflatten(const double* data);
    std::string weight_hash() const;

    /// Full forward with normalization and final activations.
    void forward(const double* x, double* out) const;
};

/// Scalar-output evaluation with exact derivatives: value by a forward pass,
/// gradient by reverse accumulation, second derivatives by one
/// forward-over-reverse sweep per direction. `n_state` inputs (the leading
/// ones) are differentiated; pseudo-inputs beyond that are held fixed.
/// Requires a single Identity output.
ValueEval mlp_value_eval(const Mlp& net, const double* x, int n_state);

// ----- tape-side builders used by the trainer -----

/// Network weights registered on a graph as parameter leaves.
struct TapeNet {
    std::vector<tape::Var> W, b;
};
TapeNet tape_register(tape::Graph& g, const Mlp& net);

/// Collects parameter adjoints in flatten() order after a backward pass.
void tape_collect_grads(const tape::Graph& g, const TapeNet& tn,
                        std::vector<double>& out);

/// Value + derivatives of a scalar net over a batch. `xn` is the already
/// normalized input [input_dim x B]; derivative vars are with respect to the
/// raw (unnormalized) leading `n_state` coordinates.
struct TapeValueEval {
    tape::Var v;
    std::array<tape::Var, 4> d1;  // log K, R, y, log kappa
    tape::Var v_kk, v_rr, v_yy, v_xx, v_kr;
};
TapeValueEval tape_value_eval(tape::Graph& g, const TapeNet& tn, const MlpSpec& spec,
                              tape::Var xn, int n_state);

/// Plain batched forward of the scalar head, no derivatives (pretraining).
tape::Var tape_value_forward(tape::Graph& g, const TapeNet& tn, const MlpSpec& spec,
                             tape::Var xn);

/// Policy forward over a batch: one [1 x B] row per output, final maps applied.
std::vector<tape::Var> tape_policy_forward(tape::Graph& g, const TapeNet& tn,
                                           const MlpSpec& spec, tape::Var xn);

/// Normalizes a raw input batch [input_dim x B] in place per the spec.
void normalize_batch(const MlpSpec& spec, std::vector<double>& x, int batch);

}  // namespace climhjb

#endif
