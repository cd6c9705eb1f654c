#include "inag/select/inag.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "inag/common/error.hpp"
#include "inag/gan/nagan.hpp"
#include "inag/select/pareto.hpp"

namespace inag::select {

void ConstraintSet::validate() const {
    auto in_unit = [](const std::optional<double>& v) { return !v || (*v >= 0.0 && *v <= 1.0); };
    if (!in_unit(max_storage_norm)) throw ConfigError("max_storage_norm must lie in [0,1]");
    if (!in_unit(max_energy_norm)) throw ConfigError("max_energy_norm must lie in [0,1]");
    if (!(max_dist >= 0.0)) throw ConfigError("max_dist must be >= 0");
}

NormalizationBase NormalizationBase::for_space(const space::SearchSpace& space, const lab::EnergyModel& model) {
    const auto a = lab::analyze(space::maximal_descriptor(space), space, model);
    return {static_cast<double>(a.storage_bits), a.energy_units};
}

Tester encoder_tester(const nn::DenseNet& encoder, const space::SearchSpace& space) {
    return [&encoder, space](const std::vector<space::ArchDescriptor>& bag) {
        return gan::encoder_predict(encoder, space, bag);
    };
}

BagSource generator_source(const nn::DenseNet& generator, const space::SearchSpace& space) {
    return [&generator, space](double c, std::size_t n, std::uint64_t seed) {
        return gan::generate_bag(generator, space, c, n, seed);
    };
}

std::vector<AnnotatedCandidate> annotate(const std::vector<space::ArchDescriptor>& bag, const Tester& tester,
                                         double c, double p_r, const space::SearchSpace& space,
                                         const lab::EnergyModel& model) {
    if (!(p_r > 0.0)) throw ConfigError("P_R must be > 0");
    const auto base = NormalizationBase::for_space(space, model);
    const auto scores = tester(bag);
    if (scores.size() != bag.size()) throw ShapeError("tester returned the wrong number of scores");
    std::vector<AnnotatedCandidate> out;
    out.reserve(bag.size());
    for (std::size_t i = 0; i < bag.size(); ++i) {
        const auto a = lab::analyze(bag[i], space, model);
        out.push_back({bag[i], scores[i], std::fabs(scores[i] - c) / p_r,
                       static_cast<double>(a.storage_bits) / base.storage_bits, a.energy_units / base.energy_units,
                       false});
    }
    return out;
}

std::vector<AnnotatedCandidate> confidence_select(const std::vector<AnnotatedCandidate>& candidates,
                                                  double max_dist) {
    std::vector<AnnotatedCandidate> out;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out),
                 [&](const AnnotatedCandidate& a) { return a.dist_f <= max_dist; });
    return out;
}

std::vector<AnnotatedCandidate> storage_select(const std::vector<AnnotatedCandidate>& candidates,
                                               std::optional<double> bound) {
    if (!bound) return candidates;
    std::vector<AnnotatedCandidate> out;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out),
                 [&](const AnnotatedCandidate& a) { return a.storage_norm <= *bound; });
    return out;
}

std::vector<AnnotatedCandidate> energy_select(const std::vector<AnnotatedCandidate>& candidates,
                                              std::optional<double> bound) {
    if (!bound) return candidates;
    std::vector<AnnotatedCandidate> out;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out),
                 [&](const AnnotatedCandidate& a) { return a.energy_norm <= *bound; });
    return out;
}

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::dist_f: return "dist_f";
        case Criterion::storage: return "storage";
        case Criterion::energy: return "energy";
    }
    return "dist_f";
}

Criterion criterion_from_string(const std::string& s) {
    if (s == "dist_f") return Criterion::dist_f;
    if (s == "storage") return Criterion::storage;
    if (s == "energy") return Criterion::energy;
    throw ConfigError("unknown output criterion '" + s + "'");
}

std::optional<AnnotatedCandidate> output_select(const std::vector<AnnotatedCandidate>& survivors,
                                                Criterion criterion) {
    if (survivors.empty()) return std::nullopt;
    using Key = std::tuple<double, double, double, double, const space::ArchDescriptor&>;
    auto key = [criterion](const AnnotatedCandidate& a) {
        const double primary = criterion == Criterion::dist_f    ? a.dist_f
                               : criterion == Criterion::storage ? a.storage_norm
                                                                 : a.energy_norm;
        return Key(primary, a.dist_f, a.storage_norm, a.energy_norm, a.descriptor);
    };
    const auto best = std::min_element(survivors.begin(), survivors.end(),
                                       [&](const AnnotatedCandidate& x, const AnnotatedCandidate& y) {
                                           return key(x) < key(y);
                                       });
    return *best;
}

void flag_pareto(std::vector<AnnotatedCandidate>& candidates) {
    std::vector<ObjectivePoint> pts;
    pts.reserve(candidates.size());
    for (const auto& c : candidates) pts.push_back({c.predicted, c.storage_norm});
    const auto flags = pareto_front(pts);
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].pareto = flags[i];
}

SelectionReport inag_run(const BagSource& source, const Tester& tester, double c0, const ConstraintSet& constraints,
                         const space::SearchSpace& space, const InagConfig& cfg) {
    constraints.validate();
    if (!(cfg.step > 0.0)) throw ConfigError("regeneration step must be > 0");
    if (!(c0 >= 0.0 && c0 <= 1.0)) throw DomainError("condition outside [0,1]");
    SelectionReport report;
    report.initial_condition = c0;
    report.bag_size = cfg.bag_size;
    report.constraints = constraints;
    report.criterion = cfg.criterion;

    constexpr double kSlack = 1e-12;
    for (std::size_t k = 0;; ++k) {
        const double c = c0 - static_cast<double>(k) * cfg.step;
        if (k > 0 && c < cfg.c_min - kSlack) break;
        const auto bag = source(c, cfg.bag_size, cfg.seed + k);
        const auto annotated = annotate(bag, tester, c, cfg.p_r, space, cfg.energy);
        const auto conf = confidence_select(annotated, constraints.max_dist);
        const auto stor = storage_select(conf, constraints.max_storage_norm);
        auto energy = energy_select(stor, constraints.max_energy_norm);
        report.attempts.push_back({c, bag.size(), conf.size(), stor.size(), energy.size()});
        if (!energy.empty()) {
            flag_pareto(energy);
            report.chosen = output_select(energy, cfg.criterion);
            report.survivors = std::move(energy);
            break;
        }
        if (c < cfg.c_min + kSlack) break;
    }
    return report;
}

void to_json(nlohmann::json& j, const AnnotatedCandidate& c) {
    j = {{"descriptor", c.descriptor}, {"predicted", c.predicted},     {"dist_f", c.dist_f},
         {"storage_norm", c.storage_norm}, {"energy_norm", c.energy_norm}, {"pareto", c.pareto}};
}

void to_json(nlohmann::json& j, const ConstraintSet& c) {
    j = {{"max_dist", c.max_dist}};
    j["max_storage_norm"] = c.max_storage_norm ? nlohmann::json(*c.max_storage_norm) : nlohmann::json(nullptr);
    j["max_energy_norm"] = c.max_energy_norm ? nlohmann::json(*c.max_energy_norm) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ConstraintSet& c) {
    for (const auto& [key, _] : j.items()) {
        if (key != "max_dist" && key != "max_storage_norm" && key != "max_energy_norm") {
            throw ConfigError("unknown key 'constraints." + key + "'");
        }
    }
    c.max_dist = j.value("max_dist", 1.0);
    c.max_storage_norm.reset();
    c.max_energy_norm.reset();
    if (j.contains("max_storage_norm") && !j["max_storage_norm"].is_null()) {
        c.max_storage_norm = j["max_storage_norm"].get<double>();
    }
    if (j.contains("max_energy_norm") && !j["max_energy_norm"].is_null()) {
        c.max_energy_norm = j["max_energy_norm"].get<double>();
    }
}

nlohmann::json report_json(const SelectionReport& r) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : r.attempts) {
        attempts.push_back({{"condition", a.condition},
                            {"bag", a.bag},
                            {"after_confidence", a.after_confidence},
                            {"after_storage", a.after_storage},
                            {"after_energy", a.after_energy}});
    }
    return {{"initial_condition", r.initial_condition},
            {"bag_size", r.bag_size},
            {"constraints", r.constraints},
            {"criterion", to_string(r.criterion)},
            {"attempts", attempts},
            {"chosen", r.chosen ? nlohmann::json(*r.chosen) : nlohmann::json(nullptr)},
            {"survivors", r.survivors.size()}};
}

std::string report_text(const SelectionReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "INAG selection, c0 = " << r.initial_condition << ", bag size " << r.bag_size << ", criterion "
        << to_string(r.criterion) << "\n";
    out << "  constraints: max_dist " << r.constraints.max_dist << ", storage "
        << (r.constraints.max_storage_norm ? std::to_string(*r.constraints.max_storage_norm) : std::string("-"))
        << ", energy "
        << (r.constraints.max_energy_norm ? std::to_string(*r.constraints.max_energy_norm) : std::string("-"))
        << "\n";
    for (const auto& a : r.attempts) {
        out << "  c = " << a.condition << ": bag " << a.bag << " -> confidence " << a.after_confidence
            << " -> storage " << a.after_storage << " -> energy " << a.after_energy << "\n";
    }
    if (r.chosen) {
        out << "  chosen " << space::to_string(r.chosen->descriptor) << " predicted " << r.chosen->predicted
            << " dist_f " << r.chosen->dist_f << " storage " << r.chosen->storage_norm << " energy "
            << r.chosen->energy_norm << "\n";
    } else {
        out << "  no candidate satisfies the constraints\n";
    }
    return out.str();
}

}  // namespace inag::select
