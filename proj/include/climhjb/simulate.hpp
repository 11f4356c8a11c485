#ifndef CLIMHJB_SIMULATE_HPP
#define CLIMHJB_SIMULATE_HPP

#include <functional>
#include <string>
#include <vector>

#include "climhjb/hjb.hpp"
#include "climhjb/params.hpp"
#include "climhjb/state.hpp"
#include "climhjb/valuation.hpp"

namespace climhjb {

/// Time-indexed record of the deterministic (drift-only) pathway.
struct Trajectory {
    std::vector<double> time;  // years
    std::vector<State> states;
    std::vector<Controls> controls;
    std::vector<Distortions> distortions;
    std::vector<ValueEval> evals;  // in-memory only, not part of the CSV
    std::vector<double> consumption;
    std::vector<double> emissions_gtc;
    std::vector<double> rd_output_ratio;
    std::vector<double> p_tech_base, p_tech_distorted;
    std::vector<double> p_damage_base, p_damage_distorted;
    std::vector<Valuations> valuations;

    std::size_t size() const { return time.size(); }
    int index_at_year(double year) const;  // nearest recorded node

    void to_csv(const std::string& path) const;
    /// Reads back the persisted columns (distortions and evals are not stored).
    static Trajectory from_csv(const std::string& path);
};

/// Solved fields feeding the simulation: the value field of the simulated
/// jump phase plus continuation evaluators for any pending jumps (the target
/// outcome is encoded in the passed state's jump tag).
struct PathwayInputs {
    const ValueField* field = nullptr;
    std::function<double(const State&)> tech_value;
    std::function<double(const State&)> damage_value;
};

/// Integrates the baseline drift path under policies re-solved from the value
/// field at every Runge-Kutta stage, recording controls, distortions, jump
/// probabilities and valuations at each node. Jump probabilities are
/// P(t) = 1 - exp(-int lambda), with the distorted aggregate intensities under
/// the closed-form tilts and the baseline ones under g = f = 1.
Trajectory simulate(const PathwayInputs& in, const State& init,
                    const UncertaintyConfig& xi, double horizon_years, double dt,
                    const ModelParams& p, const Domain& box = Domain());

/// Distorted damage-model distribution at a recorded year: prior x f_m,
/// normalized. Neutral runs return the priors.
std::vector<double> distorted_damage_histogram(const Trajectory& t, double at_year,
                                               const ModelParams& p);

/// Exponentially tilted climate-model weights implied by the temperature
/// drift-distortion channel at a recorded year. Ensemble betas are in degrees
/// per 1000 GtC (the natural display unit); they are rescaled internally.
std::vector<double> distorted_climate_histogram(const Trajectory& t, double at_year,
                                                const BetaEnsemble& ensemble,
                                                const Xi& xi, const ModelParams& p);

void write_histogram_csv(const std::string& path, const std::vector<double>& priors,
                         const std::vector<double>& weights);

}  // namespace climhjb

#endif
