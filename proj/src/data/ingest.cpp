#include "inag/data/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"

namespace inag::data {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started && !field.empty()) {
                    throw ParseError("csv line " + std::to_string(line) + ": stray quote inside unquoted field");
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                end_record();
                ++line;
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(ch);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("csv: unterminated quoted field at end of input");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

TaskDataset csv_table_from_text(std::string_view text, const std::string& target_column, std::uint64_t split_seed,
                                std::string name) {
    const auto records = parse_csv(text);
    if (records.empty()) throw ParseError("csv: missing header row");
    const auto& header = records.front();
    const auto target_it = std::find(header.begin(), header.end(), target_column);
    if (target_it == header.end()) throw ParseError("csv: target column '" + target_column + "' not in header");
    const auto target_col = static_cast<std::size_t>(target_it - header.begin());
    const std::size_t cols = header.size();
    if (cols < 2) throw ParseError("csv: need at least one feature column besides the target");

    std::vector<std::vector<double>> rows;
    std::size_t dropped = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != cols) {
            throw ParseError("csv row " + std::to_string(r + 1) + ": expected " + std::to_string(cols) +
                             " cells, found " + std::to_string(rec.size()));
        }
        bool missing = false;
        std::vector<double> values(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            std::string cell = rec[c];
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            if (cell.empty()) {
                missing = true;
                continue;
            }
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || errno == ERANGE) {
                throw ParseError("csv row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) + " ('" +
                                 header[c] + "'): non-numeric cell '" + rec[c] + "'");
            }
            values[c] = v;
        }
        if (missing) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("csv: no data rows");

    nn::Matrix features(rows.size(), cols - 1);
    std::vector<double> targets(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t fc = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            if (c == target_col) {
                targets[r] = rows[r][c];
            } else {
                features(r, fc++) = rows[r][c];
            }
        }
    }
    TaskDataset ds = make_regression_dataset(std::move(name), features, targets, split_seed);
    ds.dropped_rows = dropped;
    return ds;
}

TaskDataset load_csv_table(const std::filesystem::path& path, const std::string& target_column,
                           std::uint64_t split_seed) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ParseError("csv: cannot read " + path.string() + ": " + e.what());
    }
    return csv_table_from_text(text, target_column, split_seed, path.stem().string());
}

namespace {

std::uint32_t be32(std::string_view bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) throw ParseError("idx: truncated header");
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
    return v;
}

}  // namespace

IdxImages parse_idx_images(std::string_view bytes) {
    const std::uint32_t magic = be32(bytes, 0);
    if (magic != 2051) throw ParseError("idx images: magic " + std::to_string(magic) + ", expected 2051");
    IdxImages img;
    img.count = be32(bytes, 4);
    img.rows = be32(bytes, 8);
    img.cols = be32(bytes, 12);
    const std::size_t payload = img.count * img.rows * img.cols;
    if (bytes.size() - 16 < payload) {
        throw ParseError("idx images: truncated payload (" + std::to_string(bytes.size() - 16) + " of " +
                         std::to_string(payload) + " bytes)");
    }
    img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
    return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::string_view bytes) {
    const std::uint32_t magic = be32(bytes, 0);
    if (magic != 2049) throw ParseError("idx labels: magic " + std::to_string(magic) + ", expected 2049");
    const std::size_t count = be32(bytes, 4);
    if (bytes.size() - 8 < count) {
        throw ParseError("idx labels: truncated payload (" + std::to_string(bytes.size() - 8) + " of " +
                         std::to_string(count) + " bytes)");
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

TaskDataset idx_pair_from_bytes(std::string_view images, std::string_view labels, std::size_t limit,
                                std::size_t classes, std::uint64_t split_seed) {
    const IdxImages img = parse_idx_images(images);
    const auto lab = parse_idx_labels(labels);
    if (img.count != lab.size()) {
        throw ParseError("idx: image count " + std::to_string(img.count) + " != label count " +
                         std::to_string(lab.size()));
    }
    for (auto l : lab) {
        if (l >= classes) throw ParseError("idx: label " + std::to_string(l) + " >= class count");
    }

    std::vector<std::size_t> picked;
    if (limit == 0 || limit >= img.count) {
        picked.resize(img.count);
        for (std::size_t i = 0; i < img.count; ++i) picked[i] = i;
    } else {
        std::vector<std::size_t> quota(classes, limit / classes);
        for (std::size_t c = 0; c < limit % classes; ++c) ++quota[c];
        for (std::size_t i = 0; i < img.count; ++i) {
            if (quota[lab[i]] > 0) {
                --quota[lab[i]];
                picked.push_back(i);
            }
        }
    }

    const std::size_t dim = img.rows * img.cols;
    nn::Matrix features(picked.size(), dim);
    std::vector<int> y(picked.size());
    for (std::size_t r = 0; r < picked.size(); ++r) {
        const std::size_t src = picked[r];
        for (std::size_t p = 0; p < dim; ++p) features(r, p) = img.pixels[src * dim + p] / 255.0;
        y[r] = lab[src];
    }
    return make_classification_dataset("idx", std::move(features), y, classes, split_seed);
}

TaskDataset load_idx_pair(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                          std::size_t limit, std::size_t classes, std::uint64_t split_seed) {
    std::string images;
    std::string labels;
    try {
        images = read_file(images_path);
        labels = read_file(labels_path);
    } catch (const std::exception& e) {
        throw ParseError(std::string("idx: cannot read input: ") + e.what());
    }
    return idx_pair_from_bytes(images, labels, limit, classes, split_seed);
}

}  // namespace inag::data
