#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "inag/common/rng.hpp"
#include "inag/nn/dense_net.hpp"
#include "json.hpp"

namespace inag::space {

enum class TaskKind { regression, classification };

/// Fixed-depth MLP description space: every hidden layer picks a width and
/// a bit-width from the option lists.
struct SearchSpace {
    std::size_t layer_count = 4;
    std::vector<int> width_options;
    std::vector<int> bit_options;
    std::size_t input_dim = 1;
    std::size_t output_dim = 1;
    TaskKind task = TaskKind::regression;

    /// Throws ConfigError on any broken invariant.
    void validate() const;

    /// widths {4..512}, bits {2,3,4,5,6,8,12,16}, four hidden layers.
    static SearchSpace desk_default(std::size_t input_dim = 1, std::size_t output_dim = 1,
                                    TaskKind task = TaskKind::regression);

    /// Slots per descriptor vector (2 per layer).
    [[nodiscard]] std::size_t vector_dim() const { return 2 * layer_count; }
    /// Option count for descriptor-vector slot `slot`.
    [[nodiscard]] std::size_t options_in_slot(std::size_t slot) const {
        return slot % 2 == 0 ? width_options.size() : bit_options.size();
    }

    friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

struct LayerChoice {
    int width = 0;
    int bits = 0;
    friend auto operator<=>(const LayerChoice&, const LayerChoice&) = default;
};

/// Per-layer (width, bit-width) record. Ordering is lexicographic over
/// layers, comparing width then bits.
struct ArchDescriptor {
    std::vector<LayerChoice> layers;
    friend auto operator<=>(const ArchDescriptor&, const ArchDescriptor&) = default;
    friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

/// 2L codes in [0,1]: slot 2i is layer i's width code, 2i+1 its bits code.
using DescriptorVector = std::vector<double>;

/// Throws DomainError naming the offending layer when `d` is not a member.
void check_member(const ArchDescriptor& d, const SearchSpace& space);
[[nodiscard]] bool is_member(const ArchDescriptor& d, const SearchSpace& space);

/// Every slot drawn independently and uniformly from its option list.
ArchDescriptor sample_uniform(const SearchSpace& space, SeedStream& stream);

/// Option index j of a K-option list maps to the bin center (j + 0.5) / K.
DescriptorVector encode(const ArchDescriptor& d, const SearchSpace& space);

/// Index = min(floor(v * K), K - 1). Components must lie in [0,1].
ArchDescriptor decode(std::span<const double> v, const SearchSpace& space);

/// Option indices in slot order (width, bits, width, bits, ...).
std::vector<std::size_t> to_indices(const ArchDescriptor& d, const SearchSpace& space);
ArchDescriptor from_indices(std::span<const std::size_t> idx, const SearchSpace& space);

struct Cardinality {
    std::uint64_t value = 0;
    bool saturated = false;  // true when the exact count exceeds 2^64 - 1
};

/// (|widths| * |bits|)^L with overflow saturation.
Cardinality cardinality(const SearchSpace& space);

/// Layer sizes input_dim -> width_0 -> ... -> width_{L-1} -> output_dim.
std::vector<std::size_t> layer_dims(const ArchDescriptor& d, const SearchSpace& space);

/// ReLU hidden layers; identity output head. Classification heads emit
/// logits that are scored with softmax cross-entropy.
nn::DenseNet instantiate(const ArchDescriptor& d, const SearchSpace& space, std::uint64_t seed);

/// Descriptor with the largest width and bit options in every layer.
ArchDescriptor maximal_descriptor(const SearchSpace& space);
ArchDescriptor minimal_descriptor(const SearchSpace& space);

std::string to_string(const ArchDescriptor& d);

void to_json(nlohmann::json& j, const SearchSpace& s);
void from_json(const nlohmann::json& j, SearchSpace& s);
void to_json(nlohmann::json& j, const ArchDescriptor& d);
void from_json(const nlohmann::json& j, ArchDescriptor& d);

}  // namespace inag::space
