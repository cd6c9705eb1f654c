#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inag/lab/analytics.hpp"
#include "inag/select/inag.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::baselines {

/// Normalized performance of a descriptor (surrogate or real training).
using Evaluator = std::function<double(const space::ArchDescriptor&)>;

/// One constrained quantity: value and upper bound, both normalized.
struct ConstraintValue {
    double value = 0.0;
    double bound = 0.0;
};

/// Interior-penalty fitness.
///
/// Feasible (every slack bound - value > 0): perf - mu * sum_j 1 / slack_j.
/// Otherwise: -1 - sum_j max(0, value_j - bound_j). A zero slack counts as
/// infeasible.
double penalized_objective(double performance, std::span<const ConstraintValue> constraints, double mu);

/// Search problem shared by GA and BO.
struct SearchProblem {
    space::SearchSpace space;
    Evaluator evaluator;
    select::ConstraintSet constraints;  // only the storage/energy bounds are used
    lab::EnergyModel energy;
};

/// Penalized objective of a descriptor under `problem`.
double penalized_objective(const space::ArchDescriptor& d, double performance, const SearchProblem& problem,
                           double mu);

struct LogEntry {
    std::size_t evaluation = 0;  // 1-based evaluator call count at this point
    std::size_t round = 0;       // generation (GA) or iteration (BO)
    space::ArchDescriptor descriptor;
    double performance = 0.0;
    double objective = 0.0;
    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct SearchOutcome {
    std::string method;
    space::ArchDescriptor best;
    double best_objective = 0.0;
    double best_performance = 0.0;
    std::size_t evaluations = 0;  // distinct evaluator calls
    double wall_seconds = 0.0;
    std::vector<LogEntry> log;
};

struct GaConfig {
    std::size_t population = 40;
    std::size_t generations = 50;
    std::size_t tournament_k = 3;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    double mu = 0.01;
    double mu_growth = 0.9;
    std::uint64_t seed = 0;
    void validate() const;
};

/// Tournament selection, uniform crossover over descriptor slots, per-gene
/// uniform resampling, elitism of one. mu is multiplied by mu_growth after
/// every generation.
SearchOutcome ga_search(const SearchProblem& problem, const GaConfig& cfg);

struct BoConfig {
    std::size_t initial_samples = 10;
    std::size_t iterations = 90;
    double lengthscale = 0.25;
    double signal_variance = 1.0;
    double noise = 1e-6;
    std::size_t random_candidates = 2048;
    double mu = 0.01;
    std::uint64_t seed = 0;
    void validate() const;
};

/// GP regression with a squared-exponential kernel over encoded descriptors.
class GaussianProcess {
public:
    GaussianProcess(double lengthscale, double signal_variance, double noise);

    /// Exact posterior via Cholesky; jitter grows tenfold up to 1e-2 of the
    /// signal variance before NumericError.
    void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y);

    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };
    [[nodiscard]] Prediction predict(std::span<const double> x) const;
    [[nodiscard]] double jitter_used() const { return jitter_; }

private:
    [[nodiscard]] double kernel(std::span<const double> a, std::span<const double> b) const;

    double lengthscale_;
    double signal_variance_;
    double noise_;
    double jitter_ = 0.0;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    std::vector<std::vector<double>> x_;
    Eigen::MatrixXd chol_;  // lower Cholesky factor of K + (noise + jitter) I
    Eigen::VectorXd alpha_;
};

/// Expected improvement of a maximization problem over `incumbent`.
double expected_improvement(double mean, double variance, double incumbent);

/// Random initial design, then per iteration: fit the GP, score EI over
/// random descriptors plus single-slot tweaks of the incumbent and of the
/// best random candidate, evaluate the best unseen point.
SearchOutcome bo_search(const SearchProblem& problem, const BoConfig& cfg);

nlohmann::json outcome_json(const SearchOutcome& o, bool include_timing = true);

void to_json(nlohmann::json& j, const GaConfig& c);
void from_json(const nlohmann::json& j, GaConfig& c);
void to_json(nlohmann::json& j, const BoConfig& c);
void from_json(const nlohmann::json& j, BoConfig& c);

}  // namespace inag::baselines
