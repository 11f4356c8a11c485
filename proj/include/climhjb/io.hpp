#ifndef CLIMHJB_IO_HPP
#define CLIMHJB_IO_HPP

#include <string>
#include <vector>

#include "climhjb/dgm.hpp"
#include "climhjb/grid.hpp"
#include "climhjb/params.hpp"

namespace climhjb {

/// Everything a pipeline run needs: calibration, penalty, solver budgets,
/// output location. Loadable from an INI-style text file or JSON.
struct RunConfig {
    std::string preset = "table-1-2-3";
    int n_damage_models = 20;
    int n_tech_models = 3;
    ModelParams params;

    /// Which shocks carry drift distortions in non-neutral scenarios. The
    /// computed results in the source work tilt the jumps and the climate
    /// dynamics; "all" adds the capital and knowledge channels.
    std::string drift_channels = "climate";
    UncertaintyConfig xi = UncertaintyConfig::climate_and_jumps(Xi::make(0.1));
    std::vector<Xi> xi_list;  // scenarios for `simulate`

    GridSpec grid;
    NetArch arch;
    TrainConfig train = TrainConfig::full_preset();
    bool desk_scale = false;
    bool pseudo_inputs = true;
    Domain domain;

    std::vector<std::string> solve_order{"postboth", "posttech", "postdamage", "preboth"};

    std::string out_dir = "out";
    std::uint64_t seed = 0;

    State initial_state;  // calibrated starting point
    double sim_horizon = 40.0;
    double sim_dt = 1.0 / 12.0;
    std::string beta_ensemble_file;

    static RunConfig defaults();
    void apply_preset();   // refreshes params from the preset name
    void apply_desk_scale();
    void validate() const;
};

/// Parses `.json` as JSON, anything else as sectioned key=value text.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_json(const std::string& text);

Xi parse_xi(const std::string& s);          // number or "neutral"
std::string xi_label(const Xi& xi);         // filename-friendly

/// Builds the scenario penalty set for a scalar xi under a drift-channel mask.
UncertaintyConfig apply_drift_mask(const std::string& mask, Xi xi);

BetaEnsemble load_beta_ensemble(const std::string& path);
void save_beta_ensemble(const std::string& path, const BetaEnsemble& e,
                        const std::string& comment);

std::string file_hash(const std::string& path);
void ensure_dir(const std::string& path);

/// Append-style run manifest: one line per artifact with its content hash and
/// free-form notes.
class Manifest {
public:
    explicit Manifest(std::string path) : path_(std::move(path)) {}
    void add(const std::string& file, const std::string& notes);
    void write() const;

private:
    std::string path_;
    std::vector<std::string> lines_;
};

}  // namespace climhjb

#endif
