#include "distfor/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "distfor/random.hpp"

namespace distfor {

int scenario_signal_columns(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::null_effect: return 0;
        case ScenarioKind::step_location: return 1;
        case ScenarioKind::step_scale: return 1;
        case ScenarioKind::two_signal: return 2;
        case ScenarioKind::smooth: return 2;
        case ScenarioKind::emos_linear: return 2;
        case ScenarioKind::interaction: return 5;
    }
    return 0;
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::null_effect: return "null";
        case ScenarioKind::step_location: return "step-location";
        case ScenarioKind::step_scale: return "step-scale";
        case ScenarioKind::two_signal: return "two-signal";
        case ScenarioKind::smooth: return "smooth";
        case ScenarioKind::emos_linear: return "emos-linear";
        case ScenarioKind::interaction: return "interaction";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
    for (ScenarioKind k : {ScenarioKind::null_effect, ScenarioKind::step_location, ScenarioKind::step_scale,
                           ScenarioKind::two_signal, ScenarioKind::smooth, ScenarioKind::emos_linear,
                           ScenarioKind::interaction})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown scenario kind '" + name + "'");
}

GeneratedData generate(const SyntheticScenario& sc) {
    if (sc.n < 1) throw ConfigError("scenario needs n >= 1");
    if (sc.m_noise < 0) throw ConfigError("scenario needs m_noise >= 0");
    Rng rng(sc.seed);

    const int n = sc.n;
    const int n_signal = scenario_signal_columns(sc.kind);

    GeneratedData out;
    Dataset& ds = out.data;
    ds.response_name = "y";
    ds.y.resize(static_cast<std::size_t>(n));
    out.true_mu.resize(static_cast<std::size_t>(n));
    out.true_sigma.resize(static_cast<std::size_t>(n));

    std::vector<std::vector<double>> z(static_cast<std::size_t>(n_signal));
    for (auto& col : z) {
        col.resize(static_cast<std::size_t>(n));
        for (double& v : col) v = rng.uniform01();
    }
    if (sc.kind == ScenarioKind::emos_linear) {
        // ensemble-statistic style regressors: location signal on a wider
        // range, spread proxy strictly positive
        for (int i = 0; i < n; ++i) {
            z[0][static_cast<std::size_t>(i)] = rng.uniform(-1.0, 3.0);
            z[1][static_cast<std::size_t>(i)] = rng.uniform(0.3, 2.5);
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto zi = [&](int j) { return z[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]; };
        double mu = sc.mu_const, sigma = sc.sigma_const;
        switch (sc.kind) {
            case ScenarioKind::null_effect: break;
            case ScenarioKind::step_location:
                mu = zi(0) <= sc.changepoint ? sc.mu_low : sc.mu_high;
                break;
            case ScenarioKind::step_scale:
                sigma = zi(0) <= sc.changepoint ? sc.sigma_low : sc.sigma_high;
                break;
            case ScenarioKind::two_signal:
                mu = zi(0) <= sc.changepoint ? sc.mu_low : sc.mu_high;
                sigma = zi(1) <= sc.changepoint ? sc.sigma_low : sc.sigma_high;
                break;
            case ScenarioKind::smooth:
                mu = 1.0 + 2.0 * std::sin(3.14159265358979323846 * zi(0));
                sigma = 0.5 + zi(1);
                break;
            case ScenarioKind::emos_linear:
                mu = sc.beta0 + sc.beta1 * zi(0);
                sigma = std::exp(sc.gamma0 + sc.gamma1 * std::log(zi(1)));
                break;
            case ScenarioKind::interaction:
                mu = 0.5 + 2.0 * zi(0) + 2.5 * (zi(1) > 0.5 ? zi(2) : 1.0 - zi(2));
                sigma = 0.4 + 1.6 * zi(3) * zi(4);
                break;
        }
        out.true_mu[static_cast<std::size_t>(i)] = mu;
        out.true_sigma[static_cast<std::size_t>(i)] = sigma;
        ds.y[static_cast<std::size_t>(i)] = std::fmax(0.0, mu + sigma * rng.normal());
    }

    for (int j = 0; j < n_signal; ++j) {
        Covariate cov;
        cov.name = sc.kind == ScenarioKind::emos_linear ? (j == 0 ? "x_loc" : "x_scale")
                                                        : "z" + std::to_string(j + 1);
        cov.kind = ColumnKind::numeric;
        cov.numeric = std::move(z[static_cast<std::size_t>(j)]);
        ds.covariates.push_back(std::move(cov));
    }
    for (int j = 0; j < sc.m_noise; ++j) {
        Covariate cov;
        cov.name = "noise" + std::to_string(j + 1);
        cov.kind = ColumnKind::numeric;
        cov.numeric.resize(static_cast<std::size_t>(n));
        for (double& v : cov.numeric) v = rng.uniform01();
        ds.covariates.push_back(std::move(cov));
    }
    return out;
}

// ------------------------------ scenario files ------------------------------

SyntheticScenario parse_scenario_text(const std::string& text) {
    SyntheticScenario sc;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_kind = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::size_t eq = line.find('=');
        std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t\r") + 1);
        if (key.empty()) continue;
        if (eq == std::string::npos)
            throw ConfigError("scenario line " + std::to_string(line_no) + ": expected key = value");
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t\r") + 1);

        const auto num = [&] {
            try {
                return std::stod(value);
            } catch (const std::exception&) {
                throw ConfigError("scenario line " + std::to_string(line_no) + ": bad number '" + value + "'");
            }
        };
        if (key == "kind") {
            sc.kind = scenario_kind_from_string(value);
            have_kind = true;
        } else if (key == "n") {
            sc.n = static_cast<int>(num());
        } else if (key == "m_noise") {
            sc.m_noise = static_cast<int>(num());
        } else if (key == "seed") {
            sc.seed = static_cast<std::uint64_t>(num());
        } else if (key == "changepoint") {
            sc.changepoint = num();
        } else if (key == "mu_low") {
            sc.mu_low = num();
        } else if (key == "mu_high") {
            sc.mu_high = num();
        } else if (key == "sigma_low") {
            sc.sigma_low = num();
        } else if (key == "sigma_high") {
            sc.sigma_high = num();
        } else if (key == "mu") {
            sc.mu_const = num();
        } else if (key == "sigma") {
            sc.sigma_const = num();
        } else if (key == "beta0") {
            sc.beta0 = num();
        } else if (key == "beta1") {
            sc.beta1 = num();
        } else if (key == "gamma0") {
            sc.gamma0 = num();
        } else if (key == "gamma1") {
            sc.gamma1 = num();
        } else {
            throw ConfigError("scenario line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!have_kind) throw ConfigError("scenario file does not set 'kind'");
    return sc;
}

SyntheticScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

}  // namespace distfor
