#include "inag/bench/metric.hpp"

#include <cmath>
#include <utility>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"

namespace inag::bench {

void MetricConfig::validate() const {
    if (!(p_r > 0.0)) throw ConfigError("metric.p_r must be > 0");
    if (grid.empty()) throw ConfigError("metric.grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > 1.0) throw ConfigError("metric.grid values must lie in [0,1]");
        if (i > 0 && grid[i] <= grid[i - 1]) throw ConfigError("metric.grid must be strictly increasing");
    }
    if (bag_size == 0) throw ConfigError("metric.bag_size must be >= 1");
}

EvalTester from_tester(select::Tester tester) {
    return [t = std::move(tester)](const std::vector<space::ArchDescriptor>& bag, std::uint64_t) {
        std::vector<Evaluation> out;
        for (double p : t(bag)) out.push_back({p, false});
        return out;
    };
}

SweepSeries mdist(const select::BagSource& source, const EvalTester& tester, const MetricConfig& metric,
                  std::uint64_t seed, std::size_t per_point_limit) {
    metric.validate();
    SweepSeries series;
    const SeedStream root(seed, 0x3d15);
    double total = 0.0;
    for (std::size_t i = 0; i < metric.grid.size(); ++i) {
        const double c = metric.grid[i];
        SeedStream point = root.split(i);
        const std::uint64_t bag_seed = point.next_u64();
        const std::uint64_t test_seed = point.next_u64();
        auto bag = source(c, metric.bag_size, bag_seed);
        if (per_point_limit > 0 && bag.size() > per_point_limit) bag.resize(per_point_limit);

        SweepPoint sp;
        sp.condition = c;
        sp.samples = bag.size();
        if (!bag.empty()) {
            const auto evals = tester(bag, test_seed);
            if (evals.size() != bag.size()) throw ShapeError("tester returned the wrong number of evaluations");
            double sum = 0.0;
            for (const auto& e : evals) {
                sum += std::fabs(e.performance - c) / metric.p_r;
                sp.divergences += e.diverged ? 1 : 0;
            }
            sp.mean_dist = sum / static_cast<double>(bag.size());
        }
        series.divergences += sp.divergences;
        total += sp.mean_dist;
        series.points.push_back(sp);
    }
    series.mdist = total / static_cast<double>(metric.grid.size());
    return series;
}

std::optional<double> SweepReport::mdist_r() const {
    if (!real) return std::nullopt;
    return real->mdist;
}

SweepReport sweep(const select::BagSource& source, const EvalTester& encoder, const EvalTester* real,
                  const MetricConfig& metric, std::uint64_t seed, std::string config_digest) {
    SweepReport r;
    r.metric = metric;
    r.seed = seed;
    r.config_digest = std::move(config_digest);
    r.encoder = mdist(source, encoder, metric, seed);
    if (real != nullptr && metric.real_eval) r.real = mdist(source, *real, metric, seed, metric.real_eval_per_point);
    return r;
}

namespace {

nlohmann::json series_json(const SweepSeries& s) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : s.points) {
        points.push_back({{"condition", p.condition},
                          {"mean_dist", p.mean_dist},
                          {"samples", p.samples},
                          {"divergences", p.divergences}});
    }
    return {{"mdist", s.mdist}, {"divergences", s.divergences}, {"points", points}};
}

}  // namespace

nlohmann::json to_json_report(const SweepReport& r) {
    nlohmann::json j{{"config_digest", r.config_digest},
                     {"seed", r.seed},
                     {"metric", r.metric},
                     {"mdist_f", r.encoder.mdist},
                     {"encoder", series_json(r.encoder)}};
    if (r.real) {
        j["mdist_r"] = r.real->mdist;
        j["real"] = series_json(*r.real);
        j["f_below_r"] = r.encoder.mdist <= r.real->mdist;
    } else {
        j["mdist_r"] = nullptr;
    }
    return j;
}

void to_json(nlohmann::json& j, const MetricConfig& m) {
    j = {{"p_r", m.p_r},
         {"grid", m.grid},
         {"bag_size", m.bag_size},
         {"real_eval_per_point", m.real_eval_per_point},
         {"real_eval", m.real_eval}};
}

void from_json(const nlohmann::json& j, MetricConfig& m) {
    const MetricConfig d;
    nlohmann::json defaults;
    to_json(defaults, d);
    for (const auto& [key, _] : j.items())
        if (!defaults.contains(key)) throw ConfigError("unknown key 'metric." + key + "'");
    m.p_r = j.value("p_r", d.p_r);
    m.grid = j.value("grid", d.grid);
    m.bag_size = j.value("bag_size", d.bag_size);
    m.real_eval_per_point = j.value("real_eval_per_point", d.real_eval_per_point);
    m.real_eval = j.value("real_eval", d.real_eval);
}

}  // namespace inag::bench
