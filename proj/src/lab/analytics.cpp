#include "inag/lab/analytics.hpp"

#include <cmath>

#include "inag/common/error.hpp"
#include "inag/lab/quantize.hpp"

namespace inag::lab {

NetworkAnalytics analyze(const space::ArchDescriptor& d, const space::SearchSpace& space, const EnergyModel& model) {
    if (!(model.e_ref > 0.0)) throw ConfigError("energy model e_ref must be > 0");
    const auto dims = space::layer_dims(d, space);
    const auto bits = layer_bits(d);
    NetworkAnalytics a;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const std::uint64_t in = dims[i];
        const std::uint64_t out = dims[i + 1];
        LayerAnalytics l{in * out + out, out, in * out, bits[i]};
        a.storage_bits += (l.weights + l.features) * static_cast<std::uint64_t>(l.bits);
        a.energy_units += static_cast<double>(l.macs) * model.e_ref *
                          std::pow(static_cast<double>(l.bits) / 32.0, model.exponent);
        a.layers.push_back(l);
    }
    return a;
}

std::uint64_t storage_bits(const space::ArchDescriptor& d, const space::SearchSpace& space) {
    return analyze(d, space).storage_bits;
}

double energy_units(const space::ArchDescriptor& d, const space::SearchSpace& space, const EnergyModel& model) {
    return analyze(d, space, model).energy_units;
}

void to_json(nlohmann::json& j, const NetworkAnalytics& a) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : a.layers) layers.push_back({l.weights, l.features, l.macs, l.bits});
    j = nlohmann::json{{"layers", layers}, {"storage_bits", a.storage_bits}, {"energy_units", a.energy_units}};
}

void from_json(const nlohmann::json& j, NetworkAnalytics& a) {
    a.layers.clear();
    for (const auto& l : j.at("layers")) {
        a.layers.push_back({l.at(0).get<std::uint64_t>(), l.at(1).get<std::uint64_t>(), l.at(2).get<std::uint64_t>(),
                            l.at(3).get<int>()});
    }
    a.storage_bits = j.at("storage_bits").get<std::uint64_t>();
    a.energy_units = j.at("energy_units").get<double>();
}

void to_json(nlohmann::json& j, const EnergyModel& m) { j = {{"e_ref", m.e_ref}, {"exponent", m.exponent}}; }

void from_json(const nlohmann::json& j, EnergyModel& m) {
    for (const auto& [key, _] : j.items()) {
        if (key != "e_ref" && key != "exponent") throw ConfigError("unknown key 'energy." + key + "'");
    }
    m.e_ref = j.value("e_ref", 1.0);
    m.exponent = j.value("exponent", 2.0);
}

}  // namespace inag::lab
