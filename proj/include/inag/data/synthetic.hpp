#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "inag/data/task_dataset.hpp"
#include "json.hpp"

namespace inag::data {

/// y = f(x) + z with f a polynomial (coefficients in descending degree)
/// and z ~ N(0, noise_sigma^2).
struct SyntheticTaskSpec {
    std::vector<double> coefficients;
    double x_lo = -3.0;
    double x_hi = 3.0;
    /// Absent: 0.05 * (max - min) of the noiseless f over [x_lo, x_hi].
    std::optional<double> noise_sigma;
    std::size_t n_points = 256;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Horner evaluation, coefficients in descending degree.
double eval_polynomial(const std::vector<double>& coefficients, double x);

/// -2x^4 - 8x^3 + 5x^2 + 15
std::vector<double> f1_coefficients();
/// -2x^7 + 2x^5 - 4x^3 + 15
std::vector<double> f2_coefficients();

/// max - min of the noiseless polynomial on a dense grid over the range.
double noiseless_range(const SyntheticTaskSpec& spec);
double effective_noise_sigma(const SyntheticTaskSpec& spec);

TaskDataset make_synthetic(const SyntheticTaskSpec& spec, std::string name);

/// Data_a: f1 plus noise. Coefficients in `overrides` are ignored.
TaskDataset make_data_a(SyntheticTaskSpec overrides = {});
/// Data_b: f2 plus noise. Coefficients in `overrides` are ignored.
TaskDataset make_data_b(SyntheticTaskSpec overrides = {});

void to_json(nlohmann::json& j, const SyntheticTaskSpec& s);
void from_json(const nlohmann::json& j, SyntheticTaskSpec& s);

}  // namespace inag::data
