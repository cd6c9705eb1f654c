#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "inag/data/corpus.hpp"
#include "inag/nn/dense_net.hpp"
#include "inag/nn/optimizer.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::gan {

struct NaganConfig {
    std::size_t latent_dim = 10;
    std::vector<std::size_t> generator_hidden{64, 64};
    std::vector<std::size_t> discriminator_hidden{64, 64};
    std::vector<std::size_t> encoder_hidden{64, 64};
    std::size_t batch_size = 64;
    std::size_t iterations = 20000;
    double lambda_adv = 1.0;
    double lambda_cond = 5.0;
    double lambda_enc = 5.0;
    nn::OptimizerSettings gan_optimizer = nn::OptimizerSettings::gan_default();
    nn::OptimizerSettings encoder_optimizer = nn::OptimizerSettings::candidate_default();
    std::size_t encoder_epochs = 300;
    std::size_t encoder_batch = 32;
    /// Copy the encoder's leading layers into the discriminator trunk.
    bool init_discriminator_from_encoder = true;
    /// Spread real descriptor codes uniformly within their option bins.
    bool real_jitter = true;
    /// Phase 3 shows E the bin-snapped generator codes, with the gradient
    /// passed straight through to the continuous output.
    bool snap_teaching = false;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Shared trunk feeding an adversarial head (real vs generated) and a
/// condition head that reconstructs c.
struct Discriminator {
    nn::DenseNet trunk;
    nn::DenseNet adversarial;
    nn::DenseNet condition;
    friend bool operator==(const Discriminator&, const Discriminator&) = default;
};

struct NaganModels {
    nn::DenseNet generator;  // [c, z] -> 2L codes, sigmoid output
    Discriminator discriminator;
    nn::DenseNet encoder;  // 2L codes -> performance, frozen after pretraining
    friend bool operator==(const NaganModels&, const NaganModels&) = default;
};

struct EncoderReport {
    nn::DenseNet encoder;
    double holdout_mae = 0.0;
    std::size_t train_records = 0;
    std::size_t holdout_records = 0;
};

struct IterationLoss {
    double discriminator = 0.0;
    double generator = 0.0;
    double encoder_teaching = 0.0;
};

struct TrainingResult {
    NaganModels models;
    std::vector<IterationLoss> trace;
};

constexpr std::size_t kMinEncoderCorpus = 50;

/// Regression from encode(descriptor) to c on an 80/20 split of the corpus;
/// reports the held-out mean absolute error. Needs >= 50 records.
EncoderReport pretrain_encoder(const std::vector<data::CorpusRecord>& corpus, const space::SearchSpace& space,
                               const NaganConfig& cfg);

nn::DenseNet make_generator(const space::SearchSpace& space, const NaganConfig& cfg, std::uint64_t seed);

/// Fresh discriminator; when enabled in cfg the trunk copies the encoder's
/// leading layers (dims and activations must line up).
Discriminator init_discriminator(const nn::DenseNet& encoder, const space::SearchSpace& space,
                                 const NaganConfig& cfg, std::uint64_t seed);

/// Adversarial training with three updates per iteration: discriminator on
/// V(D), generator on V(G), then generator taught by the frozen encoder on
/// V(E). Aborts with DivergenceError after 100 consecutive non-finite
/// iterations.
TrainingResult nagan_train(const std::vector<data::CorpusRecord>& corpus, const space::SearchSpace& space,
                           const nn::DenseNet& encoder, const NaganConfig& cfg);

/// Generator inputs: one row [c, z_1..z_latent] per draw.
nn::Matrix generator_inputs(double c, std::size_t n, std::size_t latent_dim, SeedStream& stream);

/// n descriptors decoded from G(c, z) with z ~ N(0, I) drawn from `seed`.
std::vector<space::ArchDescriptor> generate_bag(const nn::DenseNet& generator, const space::SearchSpace& space,
                                                double c, std::size_t n, std::uint64_t seed);

/// Encoder prediction for each descriptor.
std::vector<double> encoder_predict(const nn::DenseNet& encoder, const space::SearchSpace& space,
                                    const std::vector<space::ArchDescriptor>& bag);

void to_json(nlohmann::json& j, const NaganConfig& c);
void from_json(const nlohmann::json& j, NaganConfig& c);

/// Bundle of all model checkpoints together with the space and config.
void write_bundle(std::ostream& out, const NaganModels& models, const space::SearchSpace& space,
                  const NaganConfig& cfg);
struct Bundle {
    NaganModels models;
    space::SearchSpace space;
    NaganConfig config;
};
Bundle read_bundle(std::istream& in);
void save_bundle(const std::filesystem::path& path, const NaganModels& models, const space::SearchSpace& space,
                 const NaganConfig& cfg);
Bundle load_bundle(const std::filesystem::path& path);

}  // namespace inag::gan
