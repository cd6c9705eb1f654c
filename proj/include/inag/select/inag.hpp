#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inag/lab/analytics.hpp"
#include "inag/nn/dense_net.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::select {

struct ConstraintSet {
    std::optional<double> max_storage_norm;
    std::optional<double> max_energy_norm;
    double max_dist = 1.0;  // confidence threshold on dist_f

    void validate() const;
};

struct AnnotatedCandidate {
    space::ArchDescriptor descriptor;
    double predicted = 0.0;  // Test_f(m)
    double dist_f = 0.0;     // |Test_f(m) - c| / P_R
    double storage_norm = 0.0;
    double energy_norm = 0.0;
    bool pareto = false;

    friend bool operator==(const AnnotatedCandidate&, const AnnotatedCandidate&) = default;
};

/// Storage and energy of the space-maximal descriptor; the bases that map
/// both quantities into [0,1].
struct NormalizationBase {
    double storage_bits = 1.0;
    double energy_units = 1.0;
    static NormalizationBase for_space(const space::SearchSpace& space, const lab::EnergyModel& model);
};

/// Performance estimate for every descriptor of a bag.
using Tester = std::function<std::vector<double>(const std::vector<space::ArchDescriptor>&)>;
/// Bag of n descriptors for condition c, reproducible from seed.
using BagSource = std::function<std::vector<space::ArchDescriptor>(double c, std::size_t n, std::uint64_t seed)>;

Tester encoder_tester(const nn::DenseNet& encoder, const space::SearchSpace& space);
BagSource generator_source(const nn::DenseNet& generator, const space::SearchSpace& space);

/// Scores a bag against condition c. p_r must be > 0.
std::vector<AnnotatedCandidate> annotate(const std::vector<space::ArchDescriptor>& bag, const Tester& tester,
                                         double c, double p_r, const space::SearchSpace& space,
                                         const lab::EnergyModel& model);

/// Keeps dist_f <= max_dist.
std::vector<AnnotatedCandidate> confidence_select(const std::vector<AnnotatedCandidate>& candidates,
                                                  double max_dist);
/// Keeps storage_norm <= bound; an absent bound keeps everything.
std::vector<AnnotatedCandidate> storage_select(const std::vector<AnnotatedCandidate>& candidates,
                                               std::optional<double> bound);
/// Keeps energy_norm <= bound; an absent bound keeps everything.
std::vector<AnnotatedCandidate> energy_select(const std::vector<AnnotatedCandidate>& candidates,
                                              std::optional<double> bound);

enum class Criterion { dist_f, storage, energy };
std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

/// Minimum under `criterion`; ties fall through dist_f, storage_norm,
/// energy_norm, then descriptor order.
std::optional<AnnotatedCandidate> output_select(const std::vector<AnnotatedCandidate>& survivors,
                                                Criterion criterion);

/// Marks the (predicted performance up, storage down) non-dominated set.
void flag_pareto(std::vector<AnnotatedCandidate>& candidates);

struct InagConfig {
    std::size_t bag_size = 200;
    double step = 0.1;   // condition decrement per regeneration
    double c_min = 0.1;  // lowest condition tried
    double p_r = 1.0;
    Criterion criterion = Criterion::dist_f;
    lab::EnergyModel energy;
    std::uint64_t seed = 0;
};

struct StageCounts {
    double condition = 0.0;
    std::size_t bag = 0;
    std::size_t after_confidence = 0;
    std::size_t after_storage = 0;
    std::size_t after_energy = 0;
};

struct SelectionReport {
    double initial_condition = 0.0;
    std::size_t bag_size = 0;
    ConstraintSet constraints;
    Criterion criterion = Criterion::dist_f;
    std::vector<StageCounts> attempts;  // one per condition tried, in order
    std::optional<AnnotatedCandidate> chosen;
    std::vector<AnnotatedCandidate> survivors;  // final attempt's survivors
};

/// confidence -> storage -> energy -> output. When nothing survives, a new
/// bag is drawn at c - step, down to c_min. Exhaustion yields a report with
/// no chosen candidate.
SelectionReport inag_run(const BagSource& source, const Tester& tester, double c0, const ConstraintSet& constraints,
                         const space::SearchSpace& space, const InagConfig& cfg);

nlohmann::json report_json(const SelectionReport& r);
std::string report_text(const SelectionReport& r);

void to_json(nlohmann::json& j, const AnnotatedCandidate& c);
void to_json(nlohmann::json& j, const ConstraintSet& c);
void from_json(const nlohmann::json& j, ConstraintSet& c);

}  // namespace inag::select
