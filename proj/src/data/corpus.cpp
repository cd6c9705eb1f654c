#include "inag/data/corpus.hpp"

#include <iomanip>
#include <sstream>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "inag/common/parallel.hpp"
#include "inag/common/rng.hpp"

namespace inag::data {

namespace {

constexpr const char* kFormat = "inag-corpus";

nlohmann::json record_json(const CorpusRecord& r) {
    return {{"index", r.index},     {"descriptor", r.descriptor}, {"condition", r.condition},
            {"raw_metric", r.raw_metric}, {"diverged", r.diverged}, {"seed", r.seed},
            {"analytics", r.analytics}};
}

CorpusRecord record_from_json(const nlohmann::json& j) {
    CorpusRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.descriptor = j.at("descriptor").get<space::ArchDescriptor>();
    r.condition = j.at("condition").get<double>();
    r.raw_metric = j.at("raw_metric").get<double>();
    r.diverged = j.at("diverged").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.analytics = j.at("analytics").get<lab::NetworkAnalytics>();
    if (!(r.condition >= 0.0 && r.condition <= 1.0)) throw ParseError("condition outside [0,1]");
    return r;
}

}  // namespace

std::filesystem::path timings_path(const std::filesystem::path& corpus_path) {
    auto p = corpus_path;
    p += ".timings";
    return p;
}

std::vector<CorpusRecord> generate_corpus(const space::SearchSpace& space, const TaskDataset& task,
                                          const CorpusGenConfig& cfg, const CandidateTrainer& trainer) {
    if (cfg.n_records < 1) throw ConfigError("corpus needs n_records >= 1");
    space.validate();
    const CandidateTrainer train = trainer ? trainer : CandidateTrainer(lab::train_candidate);
    const SeedStream root(cfg.master_seed, 0xc0);
    std::vector<CorpusRecord> records(cfg.n_records);

    parallel_for(cfg.n_records, cfg.parallelism, [&](std::size_t i) {
        SeedStream stream = root.split(i);
        CorpusRecord rec;
        rec.index = i;
        rec.descriptor = space::sample_uniform(space, stream);
        rec.seed = stream.next_u64();
        lab::CandidateTrainConfig cc = cfg.candidate;
        cc.seed = rec.seed;
        rec.analytics = lab::analyze(rec.descriptor, space, cfg.energy);
        bool done = false;
        for (int attempt = 0; attempt < 2 && !done; ++attempt) {
            try {
                const lab::CandidateResult res = train(rec.descriptor, space, task, cc, cfg.energy);
                rec.condition = res.performance;
                rec.raw_metric = res.raw_metric;
                rec.diverged = res.diverged;
                rec.train_seconds = res.train_seconds;
                done = true;
            } catch (const std::exception&) {
            }
        }
        if (!done) {
            rec.diverged = true;
            rec.condition = 0.0;
            rec.raw_metric = 0.0;
        }
        records[i] = std::move(rec);
    });
    return records;
}

std::string corpus_to_string(const CorpusHeader& header, const std::vector<CorpusRecord>& records) {
    std::ostringstream out;
    const nlohmann::json h{{"format", kFormat},         {"version", header.version}, {"space", header.space},
                           {"task", header.task},       {"master_seed", header.master_seed},
                           {"candidate", header.candidate}};
    out << h.dump() << '\n';
    for (const auto& r : records) out << record_json(r).dump() << '\n';
    return out.str();
}

Corpus corpus_from_string(const std::string& text) {
    Corpus corpus;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!have_header) {
                if (j.value("format", "") != kFormat) throw ParseError("not an inag corpus");
                corpus.header.version = j.at("version").get<int>();
                if (corpus.header.version != 1) {
                    throw ParseError("unsupported corpus version " + std::to_string(corpus.header.version));
                }
                corpus.header.space = j.at("space").get<space::SearchSpace>();
                corpus.header.task = j.at("task");
                corpus.header.master_seed = j.at("master_seed").get<std::uint64_t>();
                corpus.header.candidate = j.at("candidate");
                have_header = true;
            } else {
                corpus.records.push_back(record_from_json(j));
            }
        } catch (const std::exception& e) {
            throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw ParseError("corpus line 1: missing header");
    return corpus;
}

void write_corpus(const std::filesystem::path& path, const CorpusHeader& header,
                  const std::vector<CorpusRecord>& records) {
    write_file_atomic(path, corpus_to_string(header, records));
    std::ostringstream t;
    t << std::setprecision(17) << "index\ttrain_seconds\n";
    for (const auto& r : records) t << r.index << '\t' << r.train_seconds << '\n';
    write_file_atomic(timings_path(path), t.str());
}

Corpus read_corpus(const std::filesystem::path& path) {
    Corpus corpus = corpus_from_string(read_file(path));
    const auto tp = timings_path(path);
    if (std::filesystem::exists(tp)) {
        std::istringstream in(read_file(tp));
        std::string line;
        std::getline(in, line);
        std::size_t idx = 0;
        double secs = 0.0;
        std::size_t row = 0;
        while (in >> idx >> secs) {
            if (row < corpus.records.size() && corpus.records[row].index == idx) corpus.records[row].train_seconds = secs;
            ++row;
        }
    }
    return corpus;
}

}  // namespace inag::data
