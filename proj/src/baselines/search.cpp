#include "inag/baselines/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"

namespace inag::baselines {

double penalized_objective(double performance, std::span<const ConstraintValue> constraints, double mu) {
    double barrier = 0.0;
    double violation = 0.0;
    bool feasible = true;
    for (const auto& c : constraints) {
        const double slack = c.bound - c.value;
        if (slack > 0.0) {
            barrier += 1.0 / slack;
        } else {
            feasible = false;
            violation += std::max(0.0, c.value - c.bound);
        }
    }
    return feasible ? performance - mu * barrier : -1.0 - violation;
}

double penalized_objective(const space::ArchDescriptor& d, double performance, const SearchProblem& problem,
                           double mu) {
    std::vector<ConstraintValue> cons;
    if (problem.constraints.max_storage_norm || problem.constraints.max_energy_norm) {
        const auto base = select::NormalizationBase::for_space(problem.space, problem.energy);
        const auto a = lab::analyze(d, problem.space, problem.energy);
        if (problem.constraints.max_storage_norm) {
            cons.push_back({static_cast<double>(a.storage_bits) / base.storage_bits, *problem.constraints.max_storage_norm});
        }
        if (problem.constraints.max_energy_norm) {
            cons.push_back({a.energy_units / base.energy_units, *problem.constraints.max_energy_norm});
        }
    }
    return penalized_objective(performance, cons, mu);
}

namespace {

// Evaluator wrapper that counts distinct calls and appends to the log.
class LoggedEvaluator {
public:
    LoggedEvaluator(const SearchProblem& problem, SearchOutcome& outcome) : problem_(problem), outcome_(outcome) {}

    double performance(const space::ArchDescriptor& d) {
        const auto it = cache_.find(d);
        if (it != cache_.end()) return it->second;
        const double p = problem_.evaluator(d);
        ++outcome_.evaluations;
        cache_.emplace(d, p);
        return p;
    }

    double objective(const space::ArchDescriptor& d, double mu, std::size_t round) {
        const double p = performance(d);
        const double obj = penalized_objective(d, p, problem_, mu);
        outcome_.log.push_back({outcome_.evaluations, round, d, p, obj});
        if (outcome_.log.size() == 1 || obj > outcome_.best_objective) {
            outcome_.best_objective = obj;
            outcome_.best_performance = p;
            outcome_.best = d;
        }
        return obj;
    }

    [[nodiscard]] bool seen(const space::ArchDescriptor& d) const { return cache_.count(d) != 0; }

private:
    const SearchProblem& problem_;
    SearchOutcome& outcome_;
    std::map<space::ArchDescriptor, double> cache_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void GaConfig::validate() const {
    if (population < 2) throw ConfigError("GA population must be >= 2");
    if (generations < 1) throw ConfigError("GA needs >= 1 generation");
    if (tournament_k < 1) throw ConfigError("GA tournament_k must be >= 1");
    if (!(crossover_rate >= 0 && crossover_rate <= 1) || !(mutation_rate >= 0 && mutation_rate <= 1)) {
        throw ConfigError("GA rates must lie in [0,1]");
    }
}

SearchOutcome ga_search(const SearchProblem& problem, const GaConfig& cfg) {
    cfg.validate();
    problem.space.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SearchOutcome outcome;
    outcome.method = "GA";
    LoggedEvaluator eval(problem, outcome);
    SeedStream rng(cfg.seed, 0x9a);
    const auto& space = problem.space;
    const std::size_t slots = space.vector_dim();

    std::vector<std::vector<std::size_t>> pop;
    for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(space::to_indices(space::sample_uniform(space, rng), space));

    double mu = cfg.mu;
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<double> fitness(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            fitness[i] = eval.objective(space::from_indices(pop[i], space), mu, gen);
        }
        if (gen + 1 == cfg.generations) break;

        const auto elite = static_cast<std::size_t>(std::max_element(fitness.begin(), fitness.end()) - fitness.begin());
        auto tournament = [&] {
            std::size_t best = rng.index(pop.size());
            for (std::size_t k = 1; k < cfg.tournament_k; ++k) {
                const std::size_t c = rng.index(pop.size());
                if (fitness[c] > fitness[best]) best = c;
            }
            return best;
        };
        std::vector<std::vector<std::size_t>> next{pop[elite]};
        while (next.size() < cfg.population) {
            std::vector<std::size_t> child = pop[tournament()];
            const auto& other = pop[tournament()];
            if (rng.uniform() < cfg.crossover_rate) {
                for (std::size_t s = 0; s < slots; ++s)
                    if (rng.uniform() < 0.5) child[s] = other[s];
            }
            for (std::size_t s = 0; s < slots; ++s) {
                if (rng.uniform() < cfg.mutation_rate) child[s] = rng.index(space.options_in_slot(s));
            }
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        mu *= cfg.mu_growth;
    }
    outcome.wall_seconds = seconds_since(t0);
    return outcome;
}

void BoConfig::validate() const {
    if (!(lengthscale > 0 && signal_variance > 0 && noise >= 0)) throw ConfigError("BO kernel parameters must be positive");
    if (initial_samples < 1) throw ConfigError("BO needs >= 1 initial sample");
    if (random_candidates < 1) throw ConfigError("BO needs >= 1 random candidate per iteration");
}

GaussianProcess::GaussianProcess(double lengthscale, double signal_variance, double noise)
    : lengthscale_(lengthscale), signal_variance_(signal_variance), noise_(noise) {}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return signal_variance_ * std::exp(-0.5 * d2 / (lengthscale_ * lengthscale_));
}

void GaussianProcess::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw ShapeError("GP fit needs matching, non-empty inputs");
    const std::size_t n = x.size();
    x_ = x;
    y_mean_ = 0.0;
    for (double v : y) y_mean_ += v;
    y_mean_ /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - y_mean_) * (v - y_mean_);
    y_scale_ = n > 1 && var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 1.0;

    Eigen::MatrixXd k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x[i], x[j]);
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) yv(i) = (y[i] - y_mean_) / y_scale_;

    double jitter = 1e-10 * signal_variance_;
    const double max_jitter = 1e-2 * signal_variance_;
    for (;;) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += noise_ + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            chol_ = llt.matrixL();
            alpha_ = llt.solve(yv);
            jitter_ = jitter;
            return;
        }
        jitter *= 10.0;
        if (jitter > max_jitter) {
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
            const auto ev = es.eigenvalues();
            throw NumericError("GP covariance not positive definite after jitter " + std::to_string(max_jitter) +
                               " (n=" + std::to_string(n) + ", min eigenvalue " + std::to_string(ev.minCoeff()) +
                               ", max eigenvalue " + std::to_string(ev.maxCoeff()) + ")");
        }
    }
}

GaussianProcess::Prediction GaussianProcess::predict(std::span<const double> x) const {
    const std::size_t n = x_.size();
    Eigen::VectorXd ks(n);
    for (std::size_t i = 0; i < n; ++i) ks(i) = kernel(x, x_[i]);
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
    const double var = std::max(0.0, signal_variance_ - v.squaredNorm());
    return {y_mean_ + y_scale_ * mean, y_scale_ * y_scale_ * var};
}

double expected_improvement(double mean, double variance, double incumbent) {
    const double gap = mean - incumbent;
    if (!(variance > 0.0)) return std::max(gap, 0.0);
    const double sd = std::sqrt(variance);
    const double z = gap / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(0.0, gap * cdf + sd * pdf);
}

namespace {

std::vector<double> rank_warp(const std::vector<double>& y) {
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && y[order[j]] == y[order[i]]) ++j;
        const double r = (static_cast<double>(i + j - 1) / 2.0 + 0.5) / static_cast<double>(y.size());
        for (std::size_t k = i; k < j; ++k) out[order[k]] = r;
        i = j;
    }
    return out;
}

}  // namespace

SearchOutcome bo_search(const SearchProblem& problem, const BoConfig& cfg) {
    cfg.validate();
    problem.space.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SearchOutcome outcome;
    outcome.method = "BO";
    LoggedEvaluator eval(problem, outcome);
    SeedStream rng(cfg.seed, 0xb0);
    const auto& space = problem.space;

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    auto observe = [&](const space::ArchDescriptor& d, std::size_t round) {
        const double obj = eval.objective(d, cfg.mu, round);
        xs.push_back(space::encode(d, space));
        ys.push_back(obj);
    };

    const auto card = space::cardinality(space);
    const std::size_t reachable = card.saturated ? SIZE_MAX : static_cast<std::size_t>(card.value);
    for (std::size_t i = 0; i < cfg.initial_samples && outcome.evaluations < reachable; ++i) {
        space::ArchDescriptor d = space::sample_uniform(space, rng);
        for (int tries = 0; eval.seen(d) && tries < 64; ++tries) d = space::sample_uniform(space, rng);
        observe(d, 0);
    }

    GaussianProcess gp(cfg.lengthscale, cfg.signal_variance, cfg.noise);
    for (std::size_t it = 1; it <= cfg.iterations && outcome.evaluations < reachable; ++it) {
        // Fit on ranks rather than raw objectives: storage and energy are heavy
        // tailed, and a few huge nets would otherwise flatten the GP near the
        // optimum. Ties share their mean rank.
        const auto warped = rank_warp(ys);
        gp.fit(xs, warped);
        const double incumbent = *std::max_element(warped.begin(), warped.end());

        std::set<space::ArchDescriptor> pool;
        for (std::size_t i = 0; i < cfg.random_candidates; ++i) pool.insert(space::sample_uniform(space, rng));

        auto score = [&](const space::ArchDescriptor& d) {
            const auto p = gp.predict(space::encode(d, space));
            return expected_improvement(p.mean, p.variance, incumbent);
        };
        space::ArchDescriptor best_random;
        double best_random_ei = -1.0;
        for (const auto& d : pool) {
            if (eval.seen(d)) continue;
            const double ei = score(d);
            if (ei > best_random_ei) {
                best_random_ei = ei;
                best_random = d;
            }
        }
        // Single-slot tweaks around the incumbent and the best random point.
        std::vector<space::ArchDescriptor> anchors{outcome.best};
        if (best_random_ei >= 0.0) anchors.push_back(best_random);
        for (const auto& anchor : anchors) {
            const auto base = space::to_indices(anchor, space);
            for (std::size_t s = 0; s < base.size(); ++s) {
                for (std::size_t o = 0; o < space.options_in_slot(s); ++o) {
                    if (o == base[s]) continue;
                    auto idx = base;
                    idx[s] = o;
                    pool.insert(space::from_indices(idx, space));
                }
            }
        }

        std::optional<space::ArchDescriptor> pick;
        double pick_ei = -1.0;
        for (const auto& d : pool) {
            if (eval.seen(d)) continue;
            const double ei = score(d);
            if (ei > pick_ei) {
                pick_ei = ei;
                pick = d;
            }
        }
        if (!pick) {
            // Everything proposed was already evaluated; fall back to a fresh random point.
            space::ArchDescriptor d = space::sample_uniform(space, rng);
            for (int tries = 0; eval.seen(d) && tries < 1024; ++tries) d = space::sample_uniform(space, rng);
            if (eval.seen(d)) break;
            pick = d;
        }
        observe(*pick, it);
    }
    outcome.wall_seconds = seconds_since(t0);
    return outcome;
}

nlohmann::json outcome_json(const SearchOutcome& o, bool include_timing) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : o.log) {
        log.push_back({{"evaluation", e.evaluation},
                       {"round", e.round},
                       {"descriptor", e.descriptor},
                       {"performance", e.performance},
                       {"objective", e.objective}});
    }
    nlohmann::json j{{"method", o.method},
                     {"best", o.best},
                     {"best_objective", o.best_objective},
                     {"best_performance", o.best_performance},
                     {"evaluations", o.evaluations},
                     {"log", log}};
    if (include_timing) j["wall_seconds"] = o.wall_seconds;
    return j;
}

void to_json(nlohmann::json& j, const GaConfig& c) {
    j = {{"population", c.population},     {"generations", c.generations}, {"tournament_k", c.tournament_k},
         {"crossover_rate", c.crossover_rate}, {"mutation_rate", c.mutation_rate}, {"mu", c.mu},
         {"mu_growth", c.mu_growth},       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GaConfig& c) {
    const GaConfig d;
    nlohmann::json defaults;
    to_json(defaults, d);
    for (const auto& [key, _] : j.items())
        if (!defaults.contains(key)) throw ConfigError("unknown key 'ga." + key + "'");
    c.population = j.value("population", d.population);
    c.generations = j.value("generations", d.generations);
    c.tournament_k = j.value("tournament_k", d.tournament_k);
    c.crossover_rate = j.value("crossover_rate", d.crossover_rate);
    c.mutation_rate = j.value("mutation_rate", d.mutation_rate);
    c.mu = j.value("mu", d.mu);
    c.mu_growth = j.value("mu_growth", d.mu_growth);
    c.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const BoConfig& c) {
    j = {{"initial_samples", c.initial_samples},
         {"iterations", c.iterations},
         {"lengthscale", c.lengthscale},
         {"signal_variance", c.signal_variance},
         {"noise", c.noise},
         {"random_candidates", c.random_candidates},
         {"mu", c.mu},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, BoConfig& c) {
    const BoConfig d;
    nlohmann::json defaults;
    to_json(defaults, d);
    for (const auto& [key, _] : j.items())
        if (!defaults.contains(key)) throw ConfigError("unknown key 'bo." + key + "'");
    c.initial_samples = j.value("initial_samples", d.initial_samples);
    c.iterations = j.value("iterations", d.iterations);
    c.lengthscale = j.value("lengthscale", d.lengthscale);
    c.signal_variance = j.value("signal_variance", d.signal_variance);
    c.noise = j.value("noise", d.noise);
    c.random_candidates = j.value("random_candidates", d.random_candidates);
    c.mu = j.value("mu", d.mu);
    c.seed = j.value("seed", d.seed);
}

}  // namespace inag::baselines
