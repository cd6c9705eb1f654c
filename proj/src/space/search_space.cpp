#include "inag/space/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "inag/common/error.hpp"

namespace inag::space {

namespace {

void check_options(const std::vector<int>& opts, const char* name, int lo, int hi) {
    if (opts.empty()) throw ConfigError(std::string(name) + " must not be empty");
    for (std::size_t i = 0; i < opts.size(); ++i) {
        if (opts[i] < lo || opts[i] > hi) {
            throw ConfigError(std::string(name) + " value " + std::to_string(opts[i]) + " outside [" +
                              std::to_string(lo) + "," + std::to_string(hi) + "]");
        }
        if (i > 0 && opts[i] <= opts[i - 1]) throw ConfigError(std::string(name) + " must be strictly ascending");
    }
}

std::size_t option_index(const std::vector<int>& opts, int value) {
    const auto it = std::lower_bound(opts.begin(), opts.end(), value);
    if (it == opts.end() || *it != value) return opts.size();
    return static_cast<std::size_t>(it - opts.begin());
}

}  // namespace

void SearchSpace::validate() const {
    if (layer_count < 1) throw ConfigError("search space needs at least one layer");
    check_options(width_options, "width_options", 1, 1 << 20);
    check_options(bit_options, "bit_options", 2, 32);
    if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
    if (output_dim < 1) throw ConfigError("output_dim must be >= 1");
    if (task == TaskKind::classification && output_dim < 2) {
        throw ConfigError("classification needs output_dim >= 2");
    }
}

SearchSpace SearchSpace::desk_default(std::size_t input_dim, std::size_t output_dim, TaskKind task) {
    SearchSpace s;
    s.layer_count = 4;
    s.width_options = {4, 8, 16, 32, 64, 128, 256, 512};
    s.bit_options = {2, 3, 4, 5, 6, 8, 12, 16};
    s.input_dim = input_dim;
    s.output_dim = output_dim;
    s.task = task;
    return s;
}

void check_member(const ArchDescriptor& d, const SearchSpace& space) {
    if (d.layers.size() != space.layer_count) {
        throw DomainError("descriptor has " + std::to_string(d.layers.size()) + " layers, space has " +
                          std::to_string(space.layer_count));
    }
    for (std::size_t i = 0; i < d.layers.size(); ++i) {
        if (option_index(space.width_options, d.layers[i].width) == space.width_options.size()) {
            throw DomainError("layer " + std::to_string(i) + " width " + std::to_string(d.layers[i].width) +
                              " is not a width option");
        }
        if (option_index(space.bit_options, d.layers[i].bits) == space.bit_options.size()) {
            throw DomainError("layer " + std::to_string(i) + " bits " + std::to_string(d.layers[i].bits) +
                              " is not a bit option");
        }
    }
}

bool is_member(const ArchDescriptor& d, const SearchSpace& space) {
    if (d.layers.size() != space.layer_count) return false;
    return std::all_of(d.layers.begin(), d.layers.end(), [&](const LayerChoice& c) {
        return option_index(space.width_options, c.width) < space.width_options.size() &&
               option_index(space.bit_options, c.bits) < space.bit_options.size();
    });
}

ArchDescriptor sample_uniform(const SearchSpace& space, SeedStream& stream) {
    ArchDescriptor d;
    d.layers.reserve(space.layer_count);
    for (std::size_t i = 0; i < space.layer_count; ++i) {
        const int w = space.width_options[stream.index(space.width_options.size())];
        const int b = space.bit_options[stream.index(space.bit_options.size())];
        d.layers.push_back({w, b});
    }
    return d;
}

std::vector<std::size_t> to_indices(const ArchDescriptor& d, const SearchSpace& space) {
    check_member(d, space);
    std::vector<std::size_t> idx;
    idx.reserve(space.vector_dim());
    for (const auto& c : d.layers) {
        idx.push_back(option_index(space.width_options, c.width));
        idx.push_back(option_index(space.bit_options, c.bits));
    }
    return idx;
}

ArchDescriptor from_indices(std::span<const std::size_t> idx, const SearchSpace& space) {
    if (idx.size() != space.vector_dim()) throw ShapeError("index vector length mismatch");
    ArchDescriptor d;
    for (std::size_t i = 0; i < space.layer_count; ++i) {
        const std::size_t wi = idx[2 * i];
        const std::size_t bi = idx[2 * i + 1];
        if (wi >= space.width_options.size() || bi >= space.bit_options.size()) {
            throw DomainError("option index out of range in layer " + std::to_string(i));
        }
        d.layers.push_back({space.width_options[wi], space.bit_options[bi]});
    }
    return d;
}

DescriptorVector encode(const ArchDescriptor& d, const SearchSpace& space) {
    const auto idx = to_indices(d, space);
    DescriptorVector v(idx.size());
    for (std::size_t s = 0; s < idx.size(); ++s) {
        v[s] = (static_cast<double>(idx[s]) + 0.5) / static_cast<double>(space.options_in_slot(s));
    }
    return v;
}

ArchDescriptor decode(std::span<const double> v, const SearchSpace& space) {
    if (v.size() != space.vector_dim()) {
        throw ShapeError("descriptor vector has " + std::to_string(v.size()) + " slots, space needs " +
                         std::to_string(space.vector_dim()));
    }
    std::vector<std::size_t> idx(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) {
        if (!(v[s] >= 0.0 && v[s] <= 1.0)) {
            throw DomainError("descriptor code " + std::to_string(v[s]) + " in slot " + std::to_string(s) +
                              " outside [0,1]");
        }
        const std::size_t k = space.options_in_slot(s);
        idx[s] = std::min(static_cast<std::size_t>(std::floor(v[s] * static_cast<double>(k))), k - 1);
    }
    return from_indices(idx, space);
}

Cardinality cardinality(const SearchSpace& space) {
    space.validate();
    std::uint64_t per_layer = 0;
    if (__builtin_mul_overflow(static_cast<std::uint64_t>(space.width_options.size()),
                               static_cast<std::uint64_t>(space.bit_options.size()), &per_layer)) {
        return {UINT64_MAX, true};
    }
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < space.layer_count; ++i) {
        if (__builtin_mul_overflow(total, per_layer, &total)) return {UINT64_MAX, true};
    }
    return {total, false};
}

std::vector<std::size_t> layer_dims(const ArchDescriptor& d, const SearchSpace& space) {
    check_member(d, space);
    std::vector<std::size_t> dims{space.input_dim};
    for (const auto& c : d.layers) dims.push_back(static_cast<std::size_t>(c.width));
    dims.push_back(space.output_dim);
    return dims;
}

nn::DenseNet instantiate(const ArchDescriptor& d, const SearchSpace& space, std::uint64_t seed) {
    const auto dims = layer_dims(d, space);
    std::vector<nn::Activation> acts(dims.size() - 1, nn::Activation::relu);
    acts.back() = nn::Activation::identity;
    return nn::DenseNet::make(dims, acts, seed);
}

ArchDescriptor maximal_descriptor(const SearchSpace& space) {
    return ArchDescriptor{std::vector<LayerChoice>(space.layer_count,
                                                   {space.width_options.back(), space.bit_options.back()})};
}

ArchDescriptor minimal_descriptor(const SearchSpace& space) {
    return ArchDescriptor{std::vector<LayerChoice>(space.layer_count,
                                                   {space.width_options.front(), space.bit_options.front()})};
}

std::string to_string(const ArchDescriptor& d) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < d.layers.size(); ++i) {
        if (i) ss << '-';
        ss << d.layers[i].width << '@' << d.layers[i].bits;
    }
    return ss.str();
}

void to_json(nlohmann::json& j, const SearchSpace& s) {
    j = nlohmann::json{{"layer_count", s.layer_count},
                       {"width_options", s.width_options},
                       {"bit_options", s.bit_options},
                       {"input_dim", s.input_dim},
                       {"output_dim", s.output_dim},
                       {"task", s.task == TaskKind::regression ? "regression" : "classification"}};
}

void from_json(const nlohmann::json& j, SearchSpace& s) {
    static const std::vector<std::string> known{"layer_count", "width_options", "bit_options",
                                                "input_dim",   "output_dim",    "task"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown key 'space." + key + "'");
        }
    }
    SearchSpace d = SearchSpace::desk_default();
    s.layer_count = j.value("layer_count", d.layer_count);
    s.width_options = j.value("width_options", d.width_options);
    s.bit_options = j.value("bit_options", d.bit_options);
    s.input_dim = j.value("input_dim", d.input_dim);
    s.output_dim = j.value("output_dim", d.output_dim);
    const std::string task = j.value("task", std::string("regression"));
    if (task == "regression") {
        s.task = TaskKind::regression;
    } else if (task == "classification") {
        s.task = TaskKind::classification;
    } else {
        throw ConfigError("unknown task kind '" + task + "'");
    }
}

void to_json(nlohmann::json& j, const ArchDescriptor& d) {
    j = nlohmann::json::array();
    for (const auto& c : d.layers) j.push_back({c.width, c.bits});
}

void from_json(const nlohmann::json& j, ArchDescriptor& d) {
    d.layers.clear();
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw ParseError("descriptor layer must be [width, bits]");
        d.layers.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
    }
}

}  // namespace inag::space
