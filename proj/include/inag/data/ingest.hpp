#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "inag/data/task_dataset.hpp"

namespace inag::data {

/// RFC 4180 style records: comma separated, double-quoted fields with ""
/// escapes, quoted line breaks allowed, LF or CRLF endings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Numeric CSV table with a header row. Rows containing an empty cell are
/// dropped (counted in `dropped_rows`); any other non-numeric cell is an
/// error naming its row and column.
TaskDataset load_csv_table(const std::filesystem::path& path, const std::string& target_column,
                           std::uint64_t split_seed = 0);
TaskDataset csv_table_from_text(std::string_view text, const std::string& target_column,
                                std::uint64_t split_seed = 0, std::string name = "csv");

struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

/// Big-endian IDX parsers; magic 2051 for images, 2049 for labels.
IdxImages parse_idx_images(std::string_view bytes);
std::vector<std::uint8_t> parse_idx_labels(std::string_view bytes);

/// Pixels scaled to [0,1]. With limit > 0 the subset is stratified by label:
/// limit / classes examples per class in file order, remainder to the
/// lowest labels.
TaskDataset load_idx_pair(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                          std::size_t limit = 0, std::size_t classes = 10, std::uint64_t split_seed = 0);
TaskDataset idx_pair_from_bytes(std::string_view images, std::string_view labels, std::size_t limit = 0,
                                std::size_t classes = 10, std::uint64_t split_seed = 0);

}  // namespace inag::data
