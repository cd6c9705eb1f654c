#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "inag/data/task_dataset.hpp"
#include "inag/lab/analytics.hpp"
#include "inag/lab/candidate.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::data {

/// One (descriptor, measured normalized performance) training pair.
struct CorpusRecord {
    std::size_t index = 0;
    space::ArchDescriptor descriptor;
    double condition = 0.0;  // normalized performance c in [0,1]
    double raw_metric = 0.0;
    bool diverged = false;
    lab::NetworkAnalytics analytics;
    std::uint64_t seed = 0;      // candidate training seed
    double train_seconds = 0.0;  // stored in the timing sidecar, not the corpus file

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct CorpusHeader {
    int version = 1;
    space::SearchSpace space;
    nlohmann::json task;  // task provenance (spec of the dataset)
    std::uint64_t master_seed = 0;
    nlohmann::json candidate;  // candidate training config

    friend bool operator==(const CorpusHeader&, const CorpusHeader&) = default;
};

struct Corpus {
    CorpusHeader header;
    std::vector<CorpusRecord> records;
};

struct CorpusGenConfig {
    std::size_t n_records = 1000;
    std::size_t parallelism = 1;
    std::uint64_t master_seed = 0;
    lab::CandidateTrainConfig candidate;
    lab::EnergyModel energy;
};

/// Training function used by generate_corpus; swappable for tests.
using CandidateTrainer = std::function<lab::CandidateResult(const space::ArchDescriptor&, const space::SearchSpace&,
                                                            const TaskDataset&, const lab::CandidateTrainConfig&,
                                                            const lab::EnergyModel&)>;

/// Monte Carlo corpus: record i samples a descriptor from stream
/// (master_seed, i), trains it and records its normalized performance.
/// Output order is by record index. A trainer exception is retried once;
/// a second failure yields a record flagged diverged with condition 0.
std::vector<CorpusRecord> generate_corpus(const space::SearchSpace& space, const TaskDataset& task,
                                          const CorpusGenConfig& cfg, const CandidateTrainer& trainer = {});

/// Header line plus one JSON object per record. Timings are excluded.
std::string corpus_to_string(const CorpusHeader& header, const std::vector<CorpusRecord>& records);
Corpus corpus_from_string(const std::string& text);

/// Writes the corpus atomically; train_seconds go to `<path>.timings`.
void write_corpus(const std::filesystem::path& path, const CorpusHeader& header,
                  const std::vector<CorpusRecord>& records);
/// Reads a corpus and merges the timing sidecar when present.
Corpus read_corpus(const std::filesystem::path& path);

std::filesystem::path timings_path(const std::filesystem::path& corpus_path);

}  // namespace inag::data
