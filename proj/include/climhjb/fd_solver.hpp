#ifndef CLIMHJB_FD_SOLVER_HPP
#define CLIMHJB_FD_SOLVER_HPP

#include <vector>

#include "climhjb/grid.hpp"
#include "climhjb/hjb.hpp"

namespace climhjb {

/// Side of the one-sided stencil used for a first-derivative term: the
/// neighbor in the direction the state drifts toward.
enum class UpwindSide { Backward, Forward };

inline UpwindSide upwind_side(double drift) {
    return drift > 0.0 ? UpwindSide::Forward : UpwindSide::Backward;
}

struct FdOptions {
    double dt0 = 0.05;        // initial pseudo-time step
    double dt_growth = 2.0;   // ramp factor per pseudo-step
    // moderate cap: the pointwise control/distortion refresh acts like a
    // Picard iteration whose feedback loop destabilizes past dt ~ 1e3 when
    // the drift tilts are strong, while contraction per step is already
    // ~1/(1 + dt delta) here
    double dt_max = 500.0;
    double tol = 1e-7;        // convergence on sup |v_{s+1}-v_s| / dt
    int max_steps = 5000;
    double lin_tol = 1e-9;    // Krylov relative residual
    int lin_maxit = 20000;
    int verbose = 0;
};

struct FdReport {
    int steps = 0;
    std::vector<double> update_history;  // sup |dv| / dt per pseudo-step
    std::vector<int> controller_events;  // steps where damping/stencils changed
    double residual_median_ratio = 0.0;  // median over interior of |L(v)| / |delta v|
    double residual_median_abs = 0.0;
    ClampStats clamps;
};

/// Solves one post-jump stationary HJB on the grid by false-transient policy
/// iteration: at each pseudo-step controls and distortions are re-solved
/// pointwise from the current derivatives, then an implicit linear step is
/// taken with drift terms upwinded and diffusion terms central.
///
/// `damage_continuations` must hold the M already-solved fields v^(m,j) on the
/// same grid when solving a post-technology (pre-damage) state; it must be
/// empty for post-both states.
GridField solve_postjump(const JumpState& js, const GridSpec& grid,
                         const UncertaintyConfig& xi, const ModelParams& p,
                         const std::vector<const GridField*>& damage_continuations = {},
                         const FdOptions& opt = {}, FdReport* report = nullptr);

/// Scheme-consistent derivative set at an interior node: first derivatives
/// one-sided by the sign of the converged drift, second derivatives central.
/// Used by the residual diagnostics.
ValueEval upwind_node_eval(const GridField& f, int i, int j, int k,
                           const std::array<double, 4>& drift_signs);

}  // namespace climhjb

#endif
