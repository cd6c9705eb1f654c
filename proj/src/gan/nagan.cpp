#include "inag/gan/nagan.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "inag/common/rng.hpp"
#include "inag/nn/checkpoint.hpp"

namespace inag::gan {

namespace {

constexpr std::size_t kMaxNonFiniteRun = 100;

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

std::vector<nn::Activation> relu_then(std::size_t layers, nn::Activation last) {
    std::vector<nn::Activation> acts(layers, nn::Activation::relu);
    acts.back() = last;
    return acts;
}

nn::DenseNet make_encoder(const space::SearchSpace& space, const NaganConfig& cfg, std::uint64_t seed) {
    const auto dims = chain(space.vector_dim(), cfg.encoder_hidden, 1);
    return nn::DenseNet::make(dims, relu_then(dims.size() - 1, nn::Activation::sigmoid), seed);
}

// Loss and gradients of one discriminator pass over a batch.
struct DiscriminatorPass {
    double loss = 0.0;
    nn::Gradients trunk;
    nn::Gradients adversarial;
    nn::Gradients condition;
    nn::Matrix input_grad;
};

DiscriminatorPass discriminator_pass(const Discriminator& d, const nn::Matrix& x, double adv_target,
                                     const nn::Matrix& cond_target, double lambda_adv, double lambda_cond) {
    const auto trunk_trace = nn::forward_trace(d.trunk, x);
    const nn::Matrix& features = trunk_trace.output();
    const auto adv_trace = nn::forward_trace(d.adversarial, features);
    const auto cond_trace = nn::forward_trace(d.condition, features);
    const nn::Matrix adv_t(x.rows(), 1, adv_target);

    DiscriminatorPass p;
    p.loss = lambda_adv * nn::compute_loss(d.adversarial, adv_trace, nn::LossKind::binary_cross_entropy, adv_t) +
             lambda_cond * nn::compute_loss(d.condition, cond_trace, nn::LossKind::mse, cond_target);
    p.adversarial = nn::backward(d.adversarial, adv_trace, nn::LossKind::binary_cross_entropy, adv_t);
    p.adversarial.scale(lambda_adv);
    p.condition = nn::backward(d.condition, cond_trace, nn::LossKind::mse, cond_target);
    p.condition.scale(lambda_cond);
    nn::Matrix feature_grad = p.adversarial.input;
    for (std::size_t i = 0; i < feature_grad.size(); ++i) feature_grad.values()[i] += p.condition.input.values()[i];
    p.trunk = nn::backprop(d.trunk, trunk_trace, feature_grad);
    p.input_grad = p.trunk.input;
    return p;
}

}  // namespace

void NaganConfig::validate() const {
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (batch_size < 2) throw ConfigError("nagan batch_size must be >= 2");
    if (iterations < 1) throw ConfigError("nagan iterations must be >= 1");
    if (lambda_adv < 0 || lambda_cond < 0 || lambda_enc < 0) throw ConfigError("loss weights must be >= 0");
    if (encoder_batch < 1 || encoder_epochs < 1) throw ConfigError("encoder training needs epochs and batch >= 1");
    if (generator_hidden.empty() || discriminator_hidden.empty() || encoder_hidden.empty()) {
        throw ConfigError("generator, discriminator and encoder need at least one hidden layer");
    }
}

EncoderReport pretrain_encoder(const std::vector<data::CorpusRecord>& corpus, const space::SearchSpace& space,
                               const NaganConfig& cfg) {
    cfg.validate();
    if (corpus.size() < kMinEncoderCorpus) {
        throw ConfigError("corpus too small for encoder pretraining: " + std::to_string(corpus.size()) +
                          " records, need >= " + std::to_string(kMinEncoderCorpus));
    }
    const std::size_t n = corpus.size();
    const std::size_t dim = space.vector_dim();
    nn::Matrix x(n, dim);
    nn::Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = space::encode(corpus[i].descriptor, space);
        std::copy(v.begin(), v.end(), x.row(i).begin());
        y(i, 0) = corpus[i].condition;
    }

    SeedStream root(cfg.seed, 0xe4c0);
    const data::Split split = data::make_split(n, root.next_u64());
    EncoderReport report;
    report.train_records = split.train.size();
    report.holdout_records = split.test.size();
    report.encoder = make_encoder(space, cfg, root.next_u64());
    nn::OptimizerState opt(cfg.encoder_optimizer, report.encoder);
    SeedStream shuffle = root.split(7);

    for (std::size_t epoch = 0; epoch < cfg.encoder_epochs; ++epoch) {
        const auto order = random_permutation(shuffle, split.train.size());
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.encoder_batch) {
            const std::size_t end = std::min(order.size(), begin + cfg.encoder_batch);
            std::vector<std::size_t> rows;
            for (std::size_t i = begin; i < end; ++i) rows.push_back(split.train[order[i]]);
            const nn::Matrix bx = x.gather_rows(rows);
            const nn::Matrix by = y.gather_rows(rows);
            const auto trace = nn::forward_trace(report.encoder, bx);
            nn::apply_update(report.encoder, nn::backward(report.encoder, trace, nn::LossKind::mse, by), opt,
                             nn::Direction::descent);
        }
    }

    const nn::Matrix pred = nn::forward(report.encoder, x.gather_rows(split.test));
    const nn::Matrix truth = y.gather_rows(split.test);
    double mae = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) mae += std::fabs(pred.values()[i] - truth.values()[i]);
    report.holdout_mae = mae / static_cast<double>(pred.size());
    return report;
}

nn::DenseNet make_generator(const space::SearchSpace& space, const NaganConfig& cfg, std::uint64_t seed) {
    const auto dims = chain(cfg.latent_dim + 1, cfg.generator_hidden, space.vector_dim());
    return nn::DenseNet::make(dims, relu_then(dims.size() - 1, nn::Activation::sigmoid), seed);
}

Discriminator init_discriminator(const nn::DenseNet& encoder, const space::SearchSpace& space,
                                 const NaganConfig& cfg, std::uint64_t seed) {
    SeedStream s(seed, 0xd15c);
    std::vector<std::size_t> dims{space.vector_dim()};
    dims.insert(dims.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
    const std::vector<nn::Activation> acts(dims.size() - 1, nn::Activation::relu);

    Discriminator d;
    d.trunk = nn::DenseNet::make(dims, acts, s.next_u64());
    const std::size_t feat = dims.back();
    const std::vector<std::size_t> head_dims{feat, 1};
    const std::vector<nn::Activation> head_act{nn::Activation::sigmoid};
    d.adversarial = nn::DenseNet::make(head_dims, head_act, s.next_u64());
    d.condition = nn::DenseNet::make(head_dims, head_act, s.next_u64());

    if (cfg.init_discriminator_from_encoder) {
        const std::size_t k = d.trunk.layer_count();
        if (encoder.layer_count() <= k) {
            throw ShapeError("encoder has too few layers to initialize the discriminator trunk");
        }
        for (std::size_t i = 0; i < k; ++i) {
            const auto& src = encoder.layers()[i];
            const auto& dst = d.trunk.layers()[i];
            if (src.in_dim() != dst.in_dim() || src.out_dim() != dst.out_dim() || src.activation != dst.activation) {
                throw ShapeError("discriminator trunk layer " + std::to_string(i) +
                                 " does not match encoder layer (align discriminator_hidden with encoder_hidden)");
            }
        }
        std::vector<nn::DenseLayer> layers(encoder.layers().begin(),
                                           encoder.layers().begin() + static_cast<std::ptrdiff_t>(k));
        d.trunk = nn::DenseNet(std::move(layers), d.trunk.seed());
    }
    return d;
}

nn::Matrix generator_inputs(double c, std::size_t n, std::size_t latent_dim, SeedStream& stream) {
    nn::Matrix in(n, latent_dim + 1);
    for (std::size_t r = 0; r < n; ++r) {
        in(r, 0) = c;
        for (std::size_t j = 0; j < latent_dim; ++j) in(r, j + 1) = stream.gaussian();
    }
    return in;
}

TrainingResult nagan_train(const std::vector<data::CorpusRecord>& corpus, const space::SearchSpace& space,
                           const nn::DenseNet& encoder, const NaganConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw ConfigError("nagan training needs a non-empty corpus");
    if (encoder.input_dim() != space.vector_dim() || encoder.output_dim() != 1) {
        throw ShapeError("encoder does not match the search space");
    }

    SeedStream root(cfg.seed, 0x6a2);
    TrainingResult result;
    NaganModels& m = result.models;
    m.encoder = encoder;
    m.generator = make_generator(space, cfg, root.next_u64());
    m.discriminator = init_discriminator(encoder, space, cfg, root.next_u64());

    nn::OptimizerState opt_g(cfg.gan_optimizer, m.generator);
    nn::OptimizerState opt_trunk(cfg.gan_optimizer, m.discriminator.trunk);
    nn::OptimizerState opt_adv(cfg.gan_optimizer, m.discriminator.adversarial);
    nn::OptimizerState opt_cond(cfg.gan_optimizer, m.discriminator.condition);

    const std::size_t dim = space.vector_dim();
    std::vector<std::vector<double>> codes(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) codes[i] = space::encode(corpus[i].descriptor, space);

    SeedStream sampling = root.split(1);
    SeedStream noise = root.split(2);
    const std::size_t mb = cfg.batch_size;

    auto fake_batch = [&](nn::Matrix& conditions) {
        nn::Matrix in(mb, cfg.latent_dim + 1);
        conditions = nn::Matrix(mb, 1);
        for (std::size_t r = 0; r < mb; ++r) {
            conditions(r, 0) = noise.uniform();
            in(r, 0) = conditions(r, 0);
            for (std::size_t j = 0; j < cfg.latent_dim; ++j) in(r, j + 1) = noise.gaussian();
        }
        return in;
    };

    std::size_t non_finite_run = 0;
    result.trace.reserve(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        IterationLoss losses;
        try {
            // Phase 1: discriminator on real and generated batches.
            nn::Matrix real_x(mb, dim);
            nn::Matrix real_c(mb, 1);
            for (std::size_t r = 0; r < mb; ++r) {
                const std::size_t pick = sampling.index(corpus.size());
                for (std::size_t s = 0; s < dim; ++s) {
                    double v = codes[pick][s];
                    if (cfg.real_jitter) {
                        const double k = static_cast<double>(space.options_in_slot(s));
                        v += (sampling.uniform() - 0.5) / k;
                    }
                    real_x(r, s) = v;
                }
                real_c(r, 0) = corpus[pick].condition;
            }
            nn::Matrix fake_c;
            const nn::Matrix fake_x = nn::forward(m.generator, fake_batch(fake_c));
            DiscriminatorPass real_pass =
                discriminator_pass(m.discriminator, real_x, 1.0, real_c, cfg.lambda_adv, cfg.lambda_cond);
            DiscriminatorPass fake_pass =
                discriminator_pass(m.discriminator, fake_x, 0.0, fake_c, cfg.lambda_adv, cfg.lambda_cond);
            losses.discriminator = real_pass.loss + fake_pass.loss;
            if (!std::isfinite(losses.discriminator)) throw DivergenceError("non-finite discriminator loss");
            real_pass.trunk.add(fake_pass.trunk);
            real_pass.adversarial.add(fake_pass.adversarial);
            real_pass.condition.add(fake_pass.condition);
            // V(D) is the negated loss; ascend it.
            real_pass.trunk.scale(-1.0);
            real_pass.adversarial.scale(-1.0);
            real_pass.condition.scale(-1.0);
            nn::apply_update(m.discriminator.trunk, real_pass.trunk, opt_trunk, nn::Direction::ascent);
            nn::apply_update(m.discriminator.adversarial, real_pass.adversarial, opt_adv, nn::Direction::ascent);
            nn::apply_update(m.discriminator.condition, real_pass.condition, opt_cond, nn::Direction::ascent);

            // Phase 2: generator against the discriminator.
            if (cfg.lambda_adv > 0.0 || cfg.lambda_cond > 0.0) {
                nn::Matrix c;
                const auto g_trace = nn::forward_trace(m.generator, fake_batch(c));
                const DiscriminatorPass pass = discriminator_pass(m.discriminator, g_trace.output(), 1.0, c,
                                                                  cfg.lambda_adv, cfg.lambda_cond);
                losses.generator = pass.loss;
                if (!std::isfinite(pass.loss)) throw DivergenceError("non-finite generator loss");
                nn::apply_update(m.generator, nn::backprop(m.generator, g_trace, pass.input_grad), opt_g,
                                 nn::Direction::descent);
            }

            // Phase 3: the frozen encoder teaches the generator.
            if (cfg.lambda_enc > 0.0) {
                nn::Matrix c;
                const auto g_trace = nn::forward_trace(m.generator, fake_batch(c));
                nn::Matrix shown = g_trace.output();
                if (cfg.snap_teaching) {
                    for (std::size_t r = 0; r < shown.rows(); ++r) {
                        const auto v = space::encode(space::decode(shown.row(r), space), space);
                        std::copy(v.begin(), v.end(), shown.row(r).begin());
                    }
                }
                const auto e_trace = nn::forward_trace(m.encoder, shown);
                losses.encoder_teaching =
                    cfg.lambda_enc * nn::compute_loss(m.encoder, e_trace, nn::LossKind::mse, c);
                if (!std::isfinite(losses.encoder_teaching)) throw DivergenceError("non-finite encoder loss");
                nn::Gradients eg = nn::backward(m.encoder, e_trace, nn::LossKind::mse, c);
                nn::Matrix dx = eg.input;
                for (double& v : dx.values()) v *= cfg.lambda_enc;
                nn::apply_update(m.generator, nn::backprop(m.generator, g_trace, dx), opt_g, nn::Direction::descent);
            }
            non_finite_run = 0;
        } catch (const DivergenceError& e) {
            if (++non_finite_run >= kMaxNonFiniteRun) {
                std::ostringstream msg;
                msg << "nagan training diverged at iteration " << it << " (" << e.what() << "); last losses:";
                const std::size_t from = result.trace.size() > 5 ? result.trace.size() - 5 : 0;
                for (std::size_t i = from; i < result.trace.size(); ++i) {
                    msg << " [" << result.trace[i].discriminator << ", " << result.trace[i].generator << ", "
                        << result.trace[i].encoder_teaching << "]";
                }
                throw DivergenceError(msg.str());
            }
            losses = {std::nan(""), std::nan(""), std::nan("")};
        }
        result.trace.push_back(losses);
    }
    return result;
}

std::vector<space::ArchDescriptor> generate_bag(const nn::DenseNet& generator, const space::SearchSpace& space,
                                                double c, std::size_t n, std::uint64_t seed) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("condition " + std::to_string(c) + " outside [0,1]");
    std::vector<space::ArchDescriptor> bag;
    if (n == 0) return bag;
    SeedStream stream(seed, 0xba9);
    const nn::Matrix out = nn::forward(generator, generator_inputs(c, n, generator.input_dim() - 1, stream));
    bag.reserve(n);
    for (std::size_t r = 0; r < n; ++r) bag.push_back(space::decode(out.row(r), space));
    return bag;
}

std::vector<double> encoder_predict(const nn::DenseNet& encoder, const space::SearchSpace& space,
                                    const std::vector<space::ArchDescriptor>& bag) {
    if (bag.empty()) return {};
    nn::Matrix x(bag.size(), space.vector_dim());
    for (std::size_t i = 0; i < bag.size(); ++i) {
        const auto v = space::encode(bag[i], space);
        std::copy(v.begin(), v.end(), x.row(i).begin());
    }
    const nn::Matrix y = nn::forward(encoder, x);
    return {y.values().begin(), y.values().end()};
}

void to_json(nlohmann::json& j, const NaganConfig& c) {
    j = {{"latent_dim", c.latent_dim},
         {"generator_hidden", c.generator_hidden},
         {"discriminator_hidden", c.discriminator_hidden},
         {"encoder_hidden", c.encoder_hidden},
         {"batch_size", c.batch_size},
         {"iterations", c.iterations},
         {"lambda_adv", c.lambda_adv},
         {"lambda_cond", c.lambda_cond},
         {"lambda_enc", c.lambda_enc},
         {"gan_learning_rate", c.gan_optimizer.learning_rate},
         {"gan_beta1", c.gan_optimizer.beta1},
         {"encoder_learning_rate", c.encoder_optimizer.learning_rate},
         {"encoder_epochs", c.encoder_epochs},
         {"encoder_batch", c.encoder_batch},
         {"init_discriminator_from_encoder", c.init_discriminator_from_encoder},
         {"real_jitter", c.real_jitter},
         {"snap_teaching", c.snap_teaching},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, NaganConfig& c) {
    const NaganConfig d;
    nlohmann::json defaults;
    to_json(defaults, d);
    for (const auto& [key, _] : j.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown key 'nagan." + key + "'");
    }
    c.latent_dim = j.value("latent_dim", d.latent_dim);
    c.generator_hidden = j.value("generator_hidden", d.generator_hidden);
    c.discriminator_hidden = j.value("discriminator_hidden", d.discriminator_hidden);
    c.encoder_hidden = j.value("encoder_hidden", d.encoder_hidden);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.iterations = j.value("iterations", d.iterations);
    c.lambda_adv = j.value("lambda_adv", d.lambda_adv);
    c.lambda_cond = j.value("lambda_cond", d.lambda_cond);
    c.lambda_enc = j.value("lambda_enc", d.lambda_enc);
    c.gan_optimizer = nn::OptimizerSettings::gan_default();
    c.gan_optimizer.learning_rate = j.value("gan_learning_rate", d.gan_optimizer.learning_rate);
    c.gan_optimizer.beta1 = j.value("gan_beta1", d.gan_optimizer.beta1);
    c.encoder_optimizer = nn::OptimizerSettings::candidate_default();
    c.encoder_optimizer.learning_rate = j.value("encoder_learning_rate", d.encoder_optimizer.learning_rate);
    c.encoder_epochs = j.value("encoder_epochs", d.encoder_epochs);
    c.encoder_batch = j.value("encoder_batch", d.encoder_batch);
    c.init_discriminator_from_encoder =
        j.value("init_discriminator_from_encoder", d.init_discriminator_from_encoder);
    c.real_jitter = j.value("real_jitter", d.real_jitter);
    c.snap_teaching = j.value("snap_teaching", d.snap_teaching);
    c.seed = j.value("seed", d.seed);
}

void write_bundle(std::ostream& out, const NaganModels& models, const space::SearchSpace& space,
                  const NaganConfig& cfg) {
    out << "inag-nagan-bundle 1\n";
    out << "space " << nlohmann::json(space).dump() << '\n';
    out << "config " << nlohmann::json(cfg).dump() << '\n';
    const std::pair<const char*, const nn::DenseNet*> nets[] = {
        {"generator", &models.generator},
        {"discriminator_trunk", &models.discriminator.trunk},
        {"discriminator_adversarial", &models.discriminator.adversarial},
        {"discriminator_condition", &models.discriminator.condition},
        {"encoder", &models.encoder}};
    for (const auto& [name, net] : nets) {
        out << "net " << name << '\n';
        nn::write_checkpoint(out, *net);
    }
}

Bundle read_bundle(std::istream& in) {
    auto expect = [&](const std::string& tag) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError("bundle: unexpected end, wanted '" + tag + "'");
        if (line.rfind(tag, 0) != 0) throw ParseError("bundle: expected '" + tag + "', found '" + line + "'");
        return line.substr(tag.size());
    };
    if (expect("inag-nagan-bundle ") != "1") throw ParseError("bundle: unsupported version");
    Bundle b;
    b.space = nlohmann::json::parse(expect("space ")).get<space::SearchSpace>();
    b.config = nlohmann::json::parse(expect("config ")).get<NaganConfig>();
    expect("net generator");
    b.models.generator = nn::read_checkpoint(in);
    expect("net discriminator_trunk");
    b.models.discriminator.trunk = nn::read_checkpoint(in);
    expect("net discriminator_adversarial");
    b.models.discriminator.adversarial = nn::read_checkpoint(in);
    expect("net discriminator_condition");
    b.models.discriminator.condition = nn::read_checkpoint(in);
    expect("net encoder");
    b.models.encoder = nn::read_checkpoint(in);
    return b;
}

void save_bundle(const std::filesystem::path& path, const NaganModels& models, const space::SearchSpace& space,
                 const NaganConfig& cfg) {
    std::ostringstream out;
    write_bundle(out, models, space, cfg);
    write_file_atomic(path, out.str());
}

Bundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open bundle " + path.string());
    return read_bundle(in);
}

}  // namespace inag::gan
