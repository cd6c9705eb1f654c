#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inag/select/inag.hpp"
#include "json.hpp"

namespace inag::bench {

struct MetricConfig {
    double p_r = 1.0;
    std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t bag_size = 200;
    /// Candidates actually trained per grid point for mdist_r; 0 = whole bag.
    std::size_t real_eval_per_point = 3;
    /// Compute mdist_r at all. The CLI's --real-eval switches it on.
    bool real_eval = false;

    void validate() const;
};

/// Outcome of scoring one descriptor with some tester.
struct Evaluation {
    double performance = 0.0;
    bool diverged = false;
};

/// Scores a bag; `seed` feeds any randomness the tester needs (training).
using EvalTester = std::function<std::vector<Evaluation>(const std::vector<space::ArchDescriptor>&, std::uint64_t seed)>;

/// Wraps a plain tester (encoder surrogate); never reports divergence.
EvalTester from_tester(select::Tester tester);

struct SweepPoint {
    double condition = 0.0;
    double mean_dist = 0.0;
    std::size_t samples = 0;
    std::size_t divergences = 0;
};

struct SweepSeries {
    std::vector<SweepPoint> points;
    double mdist = 0.0;  // mean of the per-point means
    std::size_t divergences = 0;
};

/// Per grid point P_t(i): draw the bag, score the first `per_point_limit`
/// members (all when 0), take the mean of |Test(m) - P_t(i)| / P_R. The
/// aggregate is the plain mean over grid points. Divergent trainings score
/// as their reported performance and are counted.
SweepSeries mdist(const select::BagSource& source, const EvalTester& tester, const MetricConfig& metric,
                  std::uint64_t seed, std::size_t per_point_limit = 0);

struct SweepReport {
    SweepSeries encoder;               // mdist_f
    std::optional<SweepSeries> real;   // mdist_r when real evaluation ran
    std::string config_digest;
    std::uint64_t seed = 0;
    MetricConfig metric;

    [[nodiscard]] double mdist_f() const { return encoder.mdist; }
    [[nodiscard]] std::optional<double> mdist_r() const;
};

/// Encoder sweep plus, when `real` is given and metric.real_eval is set, the
/// subsampled real-training sweep over the same bags.
SweepReport sweep(const select::BagSource& source, const EvalTester& encoder, const EvalTester* real,
                  const MetricConfig& metric, std::uint64_t seed, std::string config_digest);

nlohmann::json to_json_report(const SweepReport& r);

void to_json(nlohmann::json& j, const MetricConfig& m);
void from_json(const nlohmann::json& j, MetricConfig& m);

}  // namespace inag::bench
