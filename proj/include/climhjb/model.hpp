#ifndef CLIMHJB_MODEL_HPP
#define CLIMHJB_MODEL_HPP

#include <array>

#include "climhjb/params.hpp"
#include "climhjb/state.hpp"

namespace climhjb {

/// Counters for the floors applied before evaluating logs and powers.
/// Callers that pass no counter get an exception instead of a silent clamp.
struct ClampStats {
    long long consumption = 0;     // consumption floored at kConsumptionFloor
    long long adjustment = 0;      // 1 + theta i floored at kAdjustmentFloor
    long long marginal_value = 0;  // capital marginal values floored in FOC solves
    long long exp_cap = 0;         // distortion exponents capped at +-kDistortionExpCap

    bool any() const { return consumption || adjustment || marginal_value || exp_cap; }
    std::string summary() const;
    ClampStats& operator+=(const ClampStats& o);
};

inline constexpr double kConsumptionFloor = 1e-10;
inline constexpr double kAdjustmentFloor = 1e-8;
inline constexpr double kDistortionExpCap = 60.0;

/// Arrival rate of the damage-curvature jump at temperature anomaly y.
double damage_intensity(double y, const ClimateParams& c);

/// Arrival rate of the green-technology jump at knowledge level exp(log_kappa).
double tech_intensity(double log_kappa, const EconParams& e);

/// Emission flow in GtC/yr.
double emissions(const State& s, const ModelParams& p);

/// Slope of the log-damage curve at the state's jump phase.
double damage_slope(const State& s, const ModelParams& p);

/// Drift vector of (log K, R, y, log kappa). When `h` is non-null the
/// worst-case drift tilts are added on every active shock channel; the
/// knowledge component is meaningful only while the innovation is pending.
std::array<double, 4> drift(const State& s, const Controls& c,
                            const std::array<double, 4>* h, const ModelParams& p,
                            ClampStats* stats = nullptr);

}  // namespace climhjb

#endif
