#include "climhjb/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace climhjb {

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.params = preset_table_1_2_3(c.n_damage_models, c.n_tech_models);
    c.initial_state.log_k = std::log(739.0);
    c.initial_state.r = 0.5;
    c.initial_state.y_hat = 1.1;
    c.initial_state.log_kappa = std::log(11.2);
    c.initial_state.jump = JumpState::pre_both();
    c.xi_list = {Xi::make(0.1), Xi::make_neutral()};
    return c;
}

void RunConfig::apply_preset() {
    params = preset_by_name(preset, n_damage_models, n_tech_models);
}

void RunConfig::apply_desk_scale() {
    desk_scale = true;
    train = TrainConfig::desk_preset();
}

void RunConfig::validate() const {
    params.validate();
    grid.validate();
    if (drift_channels != "all" && drift_channels != "climate" && drift_channels != "none")
        throw ConfigError("drift_channels must be all, climate, or none");
    if (sim_dt <= 0 || sim_dt > 0.1) throw ConfigError("simulate dt must be in (0, 0.1]");
    if (sim_horizon <= 0) throw ConfigError("simulate horizon must be positive");
    for (const std::string& s : solve_order)
        if (s != "postboth" && s != "posttech" && s != "postdamage" && s != "preboth")
            throw ConfigError("unknown solve-order entry: " + s);
}

Xi parse_xi(const std::string& s) {
    if (s == "neutral" || s == "inf" || s == "infinity") return Xi::make_neutral();
    double v = std::stod(s);
    if (v <= 0) throw ConfigError("xi must be positive or 'neutral'");
    return Xi::make(v);
}

UncertaintyConfig apply_drift_mask(const std::string& mask, Xi xi) {
    if (xi.neutral) return UncertaintyConfig::neutral();
    if (mask == "all") return UncertaintyConfig::common(xi);
    if (mask == "climate") return UncertaintyConfig::climate_and_jumps(xi);
    if (mask == "none") return UncertaintyConfig::jumps_only(xi);
    throw ConfigError("drift_channels must be all, climate, or none");
}

std::string xi_label(const Xi& xi) {
    if (xi.neutral) return "neutral";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", xi.value);
    std::string s = buf;
    for (char& c : s)
        if (c == '.' || c == '+' || c == '-') c = '_';
    return "xi" + s;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(trim(tok)));
    return out;
}

std::vector<std::string> parse_names(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
    return out;
}

/// One setter shared by the INI and JSON front ends. Model-parameter
/// overrides are deferred until finish() so they survive a later preset or
/// model-count line regardless of key order.
struct ConfigBuilder {
    RunConfig c = RunConfig::defaults();
    bool preset_dirty = false;
    std::vector<std::pair<std::string, std::string>> model_overrides;

    void set(const std::string& section, const std::string& key, const std::string& val) {
        auto num = [&] { return std::stod(val); };
        auto integer = [&] { return (long long)std::llround(std::stod(val)); };

        if (section.empty()) {
            if (key == "preset") {
                c.preset = val;
                preset_dirty = true;
            } else if (key == "seed") {
                c.seed = (std::uint64_t)integer();
            } else if (key == "out_dir") {
                c.out_dir = val;
            } else if (key == "desk_scale") {
                if (val == "true" || val == "1") c.apply_desk_scale();
            } else if (key == "pseudo_inputs") {
                c.pseudo_inputs = val == "true" || val == "1";
            } else if (key == "solve_order") {
                c.solve_order = parse_names(val);
            } else {
                throw ConfigError("unknown config key: " + key);
            }
            return;
        }
        if (section == "model") {
            if (key == "n_damage_models") {
                c.n_damage_models = (int)integer();
                preset_dirty = true;
            } else if (key == "n_tech_models") {
                c.n_tech_models = (int)integer();
                preset_dirty = true;
            } else {
                model_overrides.emplace_back(key, val);
            }
            return;
        }
        if (section == "uncertainty") {
            if (key == "xi")
                c.xi = apply_drift_mask(c.drift_channels, parse_xi(val));
            else if (key == "drift_channels") {
                c.drift_channels = val;
                Xi base = !c.xi.jump_damage.neutral ? c.xi.jump_damage
                                                    : Xi::make_neutral();
                c.xi = apply_drift_mask(c.drift_channels, base);
            } else if (key == "xi_drift_capital")
                c.xi.drift_capital = parse_xi(val);
            else if (key == "xi_drift_temperature")
                c.xi.drift_temperature = parse_xi(val);
            else if (key == "xi_drift_knowledge")
                c.xi.drift_knowledge = parse_xi(val);
            else if (key == "xi_jump_tech")
                c.xi.jump_tech = parse_xi(val);
            else if (key == "xi_jump_damage")
                c.xi.jump_damage = parse_xi(val);
            else
                throw ConfigError("unknown uncertainty key: " + key);
            return;
        }
        if (section == "grid") {
            auto v = parse_list(val);
            if (v.size() != 3) throw ConfigError("grid lists need three entries");
            if (key == "n")
                for (int d = 0; d < 3; ++d) c.grid.n[d] = (int)v[d];
            else if (key == "lo")
                for (int d = 0; d < 3; ++d) c.grid.lo[d] = v[d];
            else if (key == "hi")
                for (int d = 0; d < 3; ++d) c.grid.hi[d] = v[d];
            else
                throw ConfigError("unknown grid key: " + key);
            return;
        }
        if (section == "domain") {
            auto v = parse_list(val);
            if (v.size() != 4) throw ConfigError("domain lists need four entries");
            if (key == "lo")
                for (int d = 0; d < 4; ++d) c.domain.lo[d] = v[d];
            else if (key == "hi")
                for (int d = 0; d < 4; ++d) c.domain.hi[d] = v[d];
            else
                throw ConfigError("unknown domain key: " + key);
            return;
        }
        if (section == "train") {
            if (key == "epochs") c.train.epochs = integer();
            else if (key == "batch") c.train.batch = (int)integer();
            else if (key == "lr_value") c.train.lr_value = num();
            else if (key == "lr_policy") c.train.lr_policy = num();
            else if (key == "staged_lr") c.train.staged_lr = val == "true" || val == "1";
            else if (key == "grad_clip") c.train.grad_clip = num();
            else if (key == "loss_target") c.train.loss_target = num();
            else if (key == "pretrain_epochs") c.train.pretrain_epochs = integer();
            else if (key == "y_tilt") c.train.y_tilt = num();
            else if (key == "loss_window") c.train.loss_window = (int)integer();
            else if (key == "checkpoint_every") c.train.checkpoint_every = integer();
            else if (key == "hidden_layers") c.arch.hidden_layers = (int)integer();
            else if (key == "hidden_width") c.arch.hidden_width = (int)integer();
            else if (key == "invest_lo") c.arch.invest_lo = num();
            else if (key == "invest_hi") c.arch.invest_hi = num();
            else if (key == "rd_cap") c.arch.rd_cap = num();
            else throw ConfigError("unknown train key: " + key);
            return;
        }
        if (section == "simulate") {
            if (key == "horizon") c.sim_horizon = num();
            else if (key == "dt") c.sim_dt = num();
            else if (key == "beta_ensemble") c.beta_ensemble_file = val;
            else if (key == "xi_list") {
                c.xi_list.clear();
                for (const std::string& tok : parse_names(val))
                    c.xi_list.push_back(parse_xi(tok));
            } else
                throw ConfigError("unknown simulate key: " + key);
            return;
        }
        if (section == "init") {
            if (key == "k0") c.initial_state.log_k = std::log(num());
            else if (key == "log_k") c.initial_state.log_k = num();
            else if (key == "r0") c.initial_state.r = num();
            else if (key == "y0") c.initial_state.y_hat = num();
            else if (key == "kappa0") c.initial_state.log_kappa = std::log(num());
            else if (key == "log_kappa") c.initial_state.log_kappa = num();
            else throw ConfigError("unknown init key: " + key);
            return;
        }
        throw ConfigError("unknown config section: " + section);
    }

    void set_model_param(const std::string& key, const std::string& val) {
        EconParams& e = c.params.econ;
        ClimateParams& cl = c.params.climate;
        auto num = [&] { return std::stod(val); };
        if (key == "delta") e.delta = num();
        else if (key == "alpha_d") e.alpha_d = num();
        else if (key == "alpha_g") e.alpha_g = num();
        else if (key == "Gamma_d") e.Gamma_d = num();
        else if (key == "Gamma_g") e.Gamma_g = num();
        else if (key == "theta_d") e.theta_d = num();
        else if (key == "theta_g") e.theta_g = num();
        else if (key == "sigma_d") e.sigma_d = num();
        else if (key == "sigma_g") e.sigma_g = num();
        else if (key == "A_d") e.A_d = num();
        else if (key == "A_g") e.A_g = num();
        else if (key == "a_g_post") e.a_g_post = parse_list(val);
        else if (key == "pi_tech") e.pi_tech = parse_list(val);
        else if (key == "zeta") e.zeta = num();
        else if (key == "psi_0") e.psi_0 = num();
        else if (key == "psi_1") e.psi_1 = num();
        else if (key == "sigma_kappa") e.sigma_kappa = num();
        else if (key == "varrho") e.varrho = num();
        else if (key == "beta_f") cl.beta_f = num();
        else if (key == "eta") cl.eta = num();
        else if (key == "varsigma") cl.varsigma = num();
        else if (key == "gamma_1") cl.gamma_1 = num();
        else if (key == "gamma_2") cl.gamma_2 = num();
        else if (key == "gamma_3") cl.gamma_3 = parse_list(val);
        else if (key == "pi_damage") cl.pi_damage = parse_list(val);
        else if (key == "r_1") cl.r_1 = num();
        else if (key == "r_2") cl.r_2 = num();
        else if (key == "y_lower") cl.y_lower = num();
        else if (key == "y_upper") cl.y_upper = num();
        else throw ConfigError("unknown model key: " + key);
    }

    RunConfig finish() {
        if (preset_dirty) c.apply_preset();
        for (const auto& [key, val] : model_overrides) set_model_param(key, val);
        c.validate();
        return c;
    }
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    ConfigBuilder b;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        b.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return b.finish();
}

RunConfig parse_config_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ConfigBuilder b;
    std::function<void(const std::string&, const nlohmann::json&)> walk =
        [&](const std::string& section, const nlohmann::json& node) {
            for (auto it = node.begin(); it != node.end(); ++it) {
                const nlohmann::json& v = it.value();
                if (v.is_object()) {
                    if (!section.empty())
                        throw ConfigError("config nesting deeper than one section");
                    walk(it.key(), v);
                } else if (v.is_array()) {
                    std::string joined;
                    for (const auto& x : v) {
                        if (!joined.empty()) joined += ",";
                        joined += x.is_string() ? x.get<std::string>()
                                                : fmt_g17(x.get<double>());
                    }
                    b.set(section, it.key(), joined);
                } else if (v.is_boolean()) {
                    b.set(section, it.key(), v.get<bool>() ? "true" : "false");
                } else if (v.is_string()) {
                    b.set(section, it.key(), v.get<std::string>());
                } else {
                    b.set(section, it.key(), fmt_g17(v.get<double>()));
                }
            }
        };
    walk("", j);
    return b.finish();
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return parse_config_json(ss.str());
    return parse_config_text(ss.str());
}

BetaEnsemble load_beta_ensemble(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open ensemble file: " + path);
    BetaEnsemble e;
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.find("beta") != std::string::npos &&
            line.find_first_of("0123456789") == std::string::npos)
            continue;  // header row
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw IoError("ensemble rows need 'beta,prior'");
        e.beta.push_back(std::stod(trim(a)));
        e.prior.push_back(std::stod(trim(b)));
    }
    if (e.beta.empty()) throw IoError("empty ensemble file: " + path);
    double sum = 0;
    for (double p : e.prior) {
        if (p < 0) throw IoError("negative ensemble prior");
        sum += p;
    }
    for (double& p : e.prior) p /= sum;
    return e;
}

void save_beta_ensemble(const std::string& path, const BetaEnsemble& e,
                        const std::string& comment) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for write: " + path);
    if (!comment.empty()) os << "# " << comment << "\n";
    os << "beta,prior\n";
    for (std::size_t i = 0; i < e.size(); ++i)
        os << fmt_g17(e.beta[i]) << "," << fmt_g17(e.prior[i]) << "\n";
}

std::string file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot hash missing file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return hex16(fnv1a64(ss.str()));
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory: " + path);
}

void Manifest::add(const std::string& file, const std::string& notes) {
    lines_.push_back(file + "  hash=" + file_hash(file) +
                     (notes.empty() ? "" : "  " + notes));
}

void Manifest::write() const {
    std::ofstream os(path_);
    if (!os) throw IoError("cannot open for write: " + path_);
    for (const std::string& l : lines_) os << l << "\n";
}

}  // namespace climhjb
