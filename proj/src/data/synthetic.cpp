#include "inag/data/synthetic.hpp"

#include <algorithm>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"

namespace inag::data {

void SyntheticTaskSpec::validate() const {
    if (!(x_hi > x_lo)) throw ConfigError("synthetic task needs x_hi > x_lo");
    if (noise_sigma && !(*noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    if (n_points < 10) throw ConfigError("synthetic task needs n_points >= 10");
    if (coefficients.empty()) throw ConfigError("synthetic task needs polynomial coefficients");
}

double eval_polynomial(const std::vector<double>& coefficients, double x) {
    double y = 0.0;
    for (double c : coefficients) y = y * x + c;
    return y;
}

std::vector<double> f1_coefficients() { return {-2.0, -8.0, 5.0, 0.0, 15.0}; }
std::vector<double> f2_coefficients() { return {-2.0, 0.0, 2.0, 0.0, -4.0, 0.0, 0.0, 15.0}; }

double noiseless_range(const SyntheticTaskSpec& spec) {
    constexpr int kGrid = 10000;
    double lo = eval_polynomial(spec.coefficients, spec.x_lo);
    double hi = lo;
    for (int i = 1; i <= kGrid; ++i) {
        const double x = spec.x_lo + (spec.x_hi - spec.x_lo) * static_cast<double>(i) / kGrid;
        const double y = eval_polynomial(spec.coefficients, x);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    return hi - lo;
}

double effective_noise_sigma(const SyntheticTaskSpec& spec) {
    return spec.noise_sigma ? *spec.noise_sigma : 0.05 * noiseless_range(spec);
}

TaskDataset make_synthetic(const SyntheticTaskSpec& spec, std::string name) {
    spec.validate();
    const double sigma = effective_noise_sigma(spec);
    SeedStream xs(spec.seed, 0xda7a);
    SeedStream noise = xs.split(1);
    nn::Matrix x(spec.n_points, 1);
    std::vector<double> y(spec.n_points);
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        x(i, 0) = xs.uniform(spec.x_lo, spec.x_hi);
        y[i] = eval_polynomial(spec.coefficients, x(i, 0)) + sigma * noise.gaussian();
    }
    return make_regression_dataset(std::move(name), x, y, spec.seed);
}

TaskDataset make_data_a(SyntheticTaskSpec overrides) {
    overrides.coefficients = f1_coefficients();
    return make_synthetic(overrides, "data_a");
}

TaskDataset make_data_b(SyntheticTaskSpec overrides) {
    overrides.coefficients = f2_coefficients();
    return make_synthetic(overrides, "data_b");
}

void to_json(nlohmann::json& j, const SyntheticTaskSpec& s) {
    j = {{"coefficients", s.coefficients},
         {"x_lo", s.x_lo},
         {"x_hi", s.x_hi},
         {"n_points", s.n_points},
         {"seed", s.seed}};
    if (s.noise_sigma) j["noise_sigma"] = *s.noise_sigma;
}

void from_json(const nlohmann::json& j, SyntheticTaskSpec& s) {
    static const char* known[] = {"coefficients", "x_lo", "x_hi", "n_points", "seed", "noise_sigma"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError("unknown key 'synthetic." + key + "'");
        }
    }
    const SyntheticTaskSpec d;
    s.coefficients = j.value("coefficients", std::vector<double>{});
    s.x_lo = j.value("x_lo", d.x_lo);
    s.x_hi = j.value("x_hi", d.x_hi);
    s.n_points = j.value("n_points", d.n_points);
    s.seed = j.value("seed", d.seed);
    if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
}

}  // namespace inag::data
