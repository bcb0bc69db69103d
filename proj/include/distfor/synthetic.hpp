#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "distfor/dataset.hpp"

namespace distfor {

// Benchmark data generators. Responses are latent Gaussian draws censored at
// zero; the true parameter functions are emitted alongside so tests can score
// against the generating process.
enum class ScenarioKind {
    null_effect,    // constant (mu, sigma), noise covariates only
    step_location,  // mu jumps at z1 = changepoint
    step_scale,     // sigma jumps at z1 = changepoint, mu constant
    two_signal,     // mu steps in z1, sigma steps in z2
    smooth,         // smooth mu(z1), sigma(z2)
    emos_linear,    // mu, log sigma linear in x_loc, log(x_scale)
    interaction,    // nonlinear interactions in both mu and sigma, 5 signals
};

struct SyntheticScenario {
    ScenarioKind kind = ScenarioKind::null_effect;
    int n = 500;
    int m_noise = 0;
    std::uint64_t seed = 1;

    double changepoint = 0.5;
    double mu_low = 0.0, mu_high = 3.0;
    double sigma_low = 1.0, sigma_high = 3.0;
    double mu_const = 1.0, sigma_const = 1.0;

    // emos_linear coefficients
    double beta0 = 0.5, beta1 = 1.0;
    double gamma0 = -0.2, gamma1 = 0.8;
};

struct GeneratedData {
    Dataset data;
    std::vector<double> true_mu;
    std::vector<double> true_sigma;
};

GeneratedData generate(const SyntheticScenario& scenario);

// Number of signal columns the kind plants (before noise columns).
int scenario_signal_columns(ScenarioKind kind);

ScenarioKind scenario_kind_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

// Key-value scenario description: one `key = value` per line, '#' comments.
SyntheticScenario parse_scenario_text(const std::string& text);
SyntheticScenario load_scenario_file(const std::string& path);

}  // namespace distfor
