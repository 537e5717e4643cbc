#pragma once

#include "reprec/algorithms.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace reprec {

/// Full description of one experiment. Mirrors the scenario file schema; see
/// parse_scenario for defaults.
struct ScenarioSpec {
    int K = 0;
    std::vector<int> n_t;
    std::vector<int> n_r;
    double alpha = 1.0;
    double kappa = 0.0;
    double theta_t = kPi / 6.0;
    double theta_r = kPi / 6.0;
    std::vector<double> snr_grid_db = {-5, 0, 5, 10, 15, 20, 25, 30};
    int trials = 100;
    std::uint64_t seed = 12345;
    std::vector<Variant> algorithms = {Variant::reconfigurable};
    AlgorithmSettings settings;  // variant field is ignored; algorithms drive it

    void validate() const {
        if (K < 1) throw std::invalid_argument("scenario: K must be >= 1");
        if (static_cast<int>(n_t.size()) != K || static_cast<int>(n_r.size()) != K)
            throw std::invalid_argument("scenario: n_t and n_r must have one entry per user");
        for (int v : n_t)
            if (v < 1) throw std::invalid_argument("scenario: n_t entries must be >= 1");
        for (int v : n_r)
            if (v < 1) throw std::invalid_argument("scenario: n_r entries must be >= 1");
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw std::invalid_argument("scenario: alpha must be in [0, 1]");
        if (!(kappa >= 0.0)) throw std::invalid_argument("scenario: kappa must be nonnegative");
        if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
        if (snr_grid_db.empty())
            throw std::invalid_argument("scenario: snr_grid_db must be nonempty");
        for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
            if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
                throw std::invalid_argument("scenario: snr_grid_db must be strictly increasing");
        if (algorithms.empty())
            throw std::invalid_argument("scenario: algorithms must be nonempty");
        settings.validate();
    }

    ChannelParams channel_params() const { return ChannelParams{alpha, kappa, theta_t, theta_r}; }

    /// Noise variance is 1 for every receiver, so the per-Tx power budget in dB
    /// is the transmit SNR.
    NetworkConfig network_config(double snr_db) const {
        NetworkConfig cfg;
        cfg.K = K;
        cfg.n_t = n_t;
        cfg.n_r = n_r;
        cfg.power_budget = std::pow(10.0, snr_db / 10.0);
        cfg.noise_var.assign(static_cast<std::size_t>(K), 1.0);
        return cfg;
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
    for (const auto& item : j.items()) {
        if (known.find(item.key()) == known.end())
            throw std::invalid_argument("scenario: unknown key '" + item.key() + "' in " + where);
    }
}

inline std::vector<int> per_user_ints(const nlohmann::json& j, int K, const std::string& field) {
    std::vector<int> out;
    if (j.is_number_integer()) {
        out.assign(static_cast<std::size_t>(K), j.get<int>());
    } else if (j.is_array()) {
        out = j.get<std::vector<int>>();
        if (static_cast<int>(out.size()) != K)
            throw std::invalid_argument("scenario: field '" + field + "' must have K entries");
    } else {
        throw std::invalid_argument("scenario: field '" + field +
                                    "' must be an integer or an array of integers");
    }
    return out;
}

}  // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j,
        {"K", "n_t", "n_r", "alpha", "kappa", "theta_t", "theta_r", "snr_grid_db", "trials",
         "seed", "algorithms", "settings"},
        "scenario");

    ScenarioSpec spec;
    if (!j.contains("K")) throw std::invalid_argument("scenario: missing required field 'K'");
    spec.K = j.at("K").get<int>();
    if (spec.K < 1) throw std::invalid_argument("scenario: K must be >= 1");
    if (!j.contains("n_t")) throw std::invalid_argument("scenario: missing required field 'n_t'");
    if (!j.contains("n_r")) throw std::invalid_argument("scenario: missing required field 'n_r'");
    spec.n_t = detail::per_user_ints(j.at("n_t"), spec.K, "n_t");
    spec.n_r = detail::per_user_ints(j.at("n_r"), spec.K, "n_r");

    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("kappa")) spec.kappa = j.at("kappa").get<double>();
    if (j.contains("theta_t")) spec.theta_t = j.at("theta_t").get<double>();
    if (j.contains("theta_r")) spec.theta_r = j.at("theta_r").get<double>();
    if (j.contains("snr_grid_db")) spec.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    if (j.contains("trials")) spec.trials = j.at("trials").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("algorithms")) {
        spec.algorithms.clear();
        if (!j.at("algorithms").is_array())
            throw std::invalid_argument("scenario: 'algorithms' must be an array of names");
        for (const auto& name : j.at("algorithms")) {
            const auto v = variant_from_name(name.get<std::string>());
            if (!v)
                throw std::invalid_argument("scenario: unknown algorithm '" +
                                            name.get<std::string>() + "'");
            spec.algorithms.push_back(*v);
        }
    }

    if (j.contains("settings")) {
        const nlohmann::json& s = j.at("settings");
        detail::reject_unknown_keys(s, {"max_iterations", "convergence_tol", "bisection_tol"},
                                    "settings");
        if (s.contains("max_iterations"))
            spec.settings.max_iterations = s.at("max_iterations").get<int>();
        if (s.contains("convergence_tol"))
            spec.settings.convergence_tol = s.at("convergence_tol").get<double>();
        if (s.contains("bisection_tol"))
            spec.settings.bisection_tol = s.at("bisection_tol").get<double>();
    }

    spec.validate();
    return spec;
}

/// Parses a scenario file (JSON). Unknown keys are rejected; invariant
/// violations raise with the offending field named.
inline ScenarioSpec parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("scenario: malformed JSON in " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    nlohmann::json j;
    j["K"] = spec.K;
    j["n_t"] = spec.n_t;
    j["n_r"] = spec.n_r;
    j["alpha"] = spec.alpha;
    j["kappa"] = spec.kappa;
    j["theta_t"] = spec.theta_t;
    j["theta_r"] = spec.theta_r;
    j["snr_grid_db"] = spec.snr_grid_db;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    std::vector<std::string> names;
    for (Variant v : spec.algorithms) names.emplace_back(variant_name(v));
    j["algorithms"] = names;
    j["settings"] = {{"max_iterations", spec.settings.max_iterations},
                     {"convergence_tol", spec.settings.convergence_tol},
                     {"bisection_tol", spec.settings.bisection_tol}};
    return j;
}

}  // namespace reprec
