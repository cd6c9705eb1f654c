#pragma once

#include <cstdint>
#include <vector>

#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::lab {

/// Energy per MAC: e_ref * (B / 32)^p.
struct EnergyModel {
    double e_ref = 1.0;
    double exponent = 2.0;
};

struct LayerAnalytics {
    std::uint64_t weights = 0;   // W(i): in*out + out (bias included)
    std::uint64_t features = 0;  // F(i): out, one sample's activation map
    std::uint64_t macs = 0;      // MAC(i): in*out
    int bits = 0;                // B(i)
    friend bool operator==(const LayerAnalytics&, const LayerAnalytics&) = default;
};

/// Per-layer counts for the deployed network. The output head is the last
/// entry and inherits the final hidden layer's bit-width.
struct NetworkAnalytics {
    std::vector<LayerAnalytics> layers;
    std::uint64_t storage_bits = 0;
    double energy_units = 0.0;

    [[nodiscard]] std::size_t layer_count() const { return layers.size(); }
    friend bool operator==(const NetworkAnalytics&, const NetworkAnalytics&) = default;
};

NetworkAnalytics analyze(const space::ArchDescriptor& d, const space::SearchSpace& space,
                         const EnergyModel& model = {});

/// sum_i (W(i) + F(i)) * B(i)
std::uint64_t storage_bits(const space::ArchDescriptor& d, const space::SearchSpace& space);

/// sum_i MAC(i) * e_ref * (B(i) / 32)^p
double energy_units(const space::ArchDescriptor& d, const space::SearchSpace& space, const EnergyModel& model = {});

void to_json(nlohmann::json& j, const NetworkAnalytics& a);
void from_json(const nlohmann::json& j, NetworkAnalytics& a);
void to_json(nlohmann::json& j, const EnergyModel& m);
void from_json(const nlohmann::json& j, EnergyModel& m);

}  // namespace inag::lab
