#ifndef CLIMHJB_VALUATION_HPP
#define CLIMHJB_VALUATION_HPP

#include "climhjb/params.hpp"
#include "climhjb/state.hpp"

namespace climhjb {

/// Consumption-numeraire shadow prices: marginal social cost of emissions and
/// marginal social values of R&D, green capital, and dirty capital.
struct Valuations {
    double scc = 0.0;  // per 1000 units of the emission flow's natural unit
    double svr = 0.0;
    double svg = 0.0;
    double svd = 0.0;
};

/// Evaluates the planner's shadow prices at a state. Each expression is the
/// corresponding marginal-value term scaled by the inverse marginal utility
/// of consumption c/delta. SVR is zero when no R&D is active.
Valuations social_valuations(const State& s, const ValueEval& ve, const Controls& c,
                             const ModelParams& p);

}  // namespace climhjb

#endif
