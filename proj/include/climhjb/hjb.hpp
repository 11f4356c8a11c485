#ifndef CLIMHJB_HJB_HPP
#define CLIMHJB_HJB_HPP

#include <utility>

#include "climhjb/model.hpp"
#include "climhjb/params.hpp"
#include "climhjb/state.hpp"

namespace climhjb {

/// Per-capital consumption in the state's jump phase. The caller is
/// responsible for checking positivity.
double consumption(const State& s, const Controls& c, const ModelParams& p);

struct FocOptions {
    /// Floor nonpositive capital marginal values at kAdjustmentFloor instead
    /// of throwing; requires `stats` so the event is recorded.
    bool clamp_nonpositive_marginals = false;
    ClampStats* stats = nullptr;
};

/// Maximizing investment choices. Every first-order condition expresses its
/// control as a monotone function of delta/c, so the solve reduces to a
/// bracketed scalar root-find in consumption followed by a Newton polish.
Controls max_foc_solve(const State& s, const ValueEval& ve, const ModelParams& p,
                       const FocOptions& opt = {});

/// Closed-form minimizing distortions for the state's active channels.
/// Neutral channels return h = 0, g = 1, f = 1.
Distortions min_foc_distortions(const State& s, const ValueEval& ve,
                                const JumpTermInputs& jumps, const UncertaintyConfig& xi,
                                const ModelParams& p, ClampStats* stats = nullptr);

/// Bellman right-hand side with the supplied controls and distortions.
double hjb_rhs(const State& s, const ValueEval& ve, const Controls& c,
               const Distortions& d, const JumpTermInputs& jumps,
               const UncertaintyConfig& xi, const ModelParams& p,
               ClampStats* stats = nullptr);

/// rhs - delta v; zero at the solved value function under optimal choices.
double hjb_residual(const State& s, const ValueEval& ve, const Controls& c,
                    const Distortions& d, const JumpTermInputs& jumps,
                    const UncertaintyConfig& xi, const ModelParams& p,
                    ClampStats* stats = nullptr);

/// Distortion-weighted aggregate arrival rates (technology, damage).
std::pair<double, double> distorted_intensities(const State& s, const Distortions& d,
                                                const JumpTermInputs& jumps,
                                                const ModelParams& p);

/// Ensures the jump continuation inputs match the state's phase and the
/// prior vectors; throws SolveError otherwise.
void check_jump_inputs(const JumpState& js, const JumpTermInputs& jumps);

/// Neutral jump inputs of the right arity for a phase (values must still be
/// supplied by the caller for phases with pending jumps).
JumpTermInputs empty_jump_inputs();

}  // namespace climhjb

#endif
