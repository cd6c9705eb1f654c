#include "inag/bench/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "inag/select/pareto.hpp"

namespace inag::bench {

namespace {

constexpr const char* kScatterHeader = "condition\tperformance\tstorage_norm\tenergy_norm\tpareto\tdescriptor";

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) return out;
        start = tab + 1;
    }
}

}  // namespace

std::vector<ScatterRow> scatter_rows(const std::vector<double>& conditions,
                                     const std::vector<select::AnnotatedCandidate>& candidates) {
    if (conditions.size() != candidates.size()) throw ShapeError("one condition per scatter candidate required");
    std::vector<select::ObjectivePoint> pts;
    for (const auto& c : candidates) pts.push_back({c.predicted, c.storage_norm});
    const auto front = select::pareto_front(pts);
    std::vector<ScatterRow> rows;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        rows.push_back({conditions[i], c.predicted, c.storage_norm, c.energy_norm, front[i], c.descriptor});
    }
    return rows;
}

std::string scatter_to_string(const std::vector<ScatterRow>& rows) {
    std::ostringstream out;
    out << kScatterHeader << '\n';
    for (const auto& r : rows) {
        out << num(r.condition) << '\t' << num(r.performance) << '\t' << num(r.storage_norm) << '\t'
            << num(r.energy_norm) << '\t' << (r.pareto ? 1 : 0) << '\t' << nlohmann::json(r.descriptor).dump()
            << '\n';
    }
    return out.str();
}

std::vector<ScatterRow> parse_scatter(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kScatterHeader) throw ParseError("scatter: missing or wrong header");
    std::vector<ScatterRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto cells = split_tabs(line);
        if (cells.size() != 6) throw ParseError("scatter line " + std::to_string(line_no) + ": expected 6 columns");
        try {
            ScatterRow r;
            r.condition = std::stod(cells[0]);
            r.performance = std::stod(cells[1]);
            r.storage_norm = std::stod(cells[2]);
            r.energy_norm = std::stod(cells[3]);
            if (cells[4] != "0" && cells[4] != "1") throw ParseError("bad pareto flag");
            r.pareto = cells[4] == "1";
            r.descriptor = nlohmann::json::parse(cells[5]).get<space::ArchDescriptor>();
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw ParseError("scatter line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

void emit_scatter(const std::vector<ScatterRow>& rows, const std::filesystem::path& path) {
    write_file_atomic(path, scatter_to_string(rows));
}

ComparisonTable compare_baselines(const ComparisonInputs& in, std::vector<baselines::SearchOutcome>* outcomes) {
    ComparisonTable table;
    for (const auto& method : in.methods) {
        ComparisonRow row;
        row.method = method;
        if (method == "inag") {
            const auto t0 = std::chrono::steady_clock::now();
            std::size_t draws = 0;
            select::Tester counting = [&](const std::vector<space::ArchDescriptor>& bag) {
                draws += bag.size();
                return in.tester(bag);
            };
            const auto report = select::inag_run(in.source, counting, in.condition, in.problem.constraints,
                                                 in.problem.space, in.inag);
            row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.evaluations = draws;
            if (report.chosen) {
                row.best = report.chosen->descriptor;
                const double perf = in.problem.evaluator(*row.best);
                row.best_performance = perf;
                row.best_objective = baselines::penalized_objective(*row.best, perf, in.problem, in.ga.mu);
            }
        } else {
            const auto outcome = method == "ga" ? baselines::ga_search(in.problem, in.ga)
                                                : baselines::bo_search(in.problem, in.bo);
            row.best = outcome.best;
            row.best_objective = outcome.best_objective;
            row.best_performance = outcome.best_performance;
            row.evaluations = outcome.evaluations;
            row.wall_seconds = outcome.wall_seconds;
            if (outcomes != nullptr) outcomes->push_back(outcome);
        }
        table.rows.push_back(std::move(row));
    }
    if (std::find(in.methods.begin(), in.methods.end(), "inag") != in.methods.end()) {
        std::string note = "inag wall_seconds covers generation and selection only; NAGAN training ";
        note += in.nagan_train_seconds ? "took " + short_num(*in.nagan_train_seconds, 4) + " s (train stage)"
                                       : "time is not included";
        table.footnotes.push_back(note);
    }
    return table;
}

std::string comparison_csv(const ComparisonTable& t, bool include_timing) {
    std::ostringstream out;
    out << "method,best_objective,best_performance,evaluations";
    if (include_timing) out << ",wall_seconds";
    out << ",best_descriptor\n";
    for (const auto& r : t.rows) {
        out << r.method << ',' << (r.best_objective ? num(*r.best_objective) : "") << ','
            << (r.best_performance ? num(*r.best_performance) : "") << ',' << r.evaluations;
        if (include_timing) out << ',' << short_num(r.wall_seconds, 6);
        out << ',' << (r.best ? space::to_string(*r.best) : "") << '\n';
    }
    // Footnotes carry timing, so they go with the timing columns.
    if (include_timing)
        for (const auto& f : t.footnotes) out << "# " << f << '\n';
    return out.str();
}

std::string comparison_text(const ComparisonTable& t, bool include_timing) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"method", "best_objective", "best_performance", "evaluations"};
    if (include_timing) header.push_back("wall_seconds");
    header.push_back("best_descriptor");
    cells.push_back(header);
    for (const auto& r : t.rows) {
        std::vector<std::string> row{r.method, r.best_objective ? short_num(*r.best_objective) : "-",
                                     r.best_performance ? short_num(*r.best_performance) : "-",
                                     std::to_string(r.evaluations)};
        if (include_timing) row.push_back(short_num(r.wall_seconds, 4));
        row.push_back(r.best ? space::to_string(*r.best) : "-");
        cells.push_back(std::move(row));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << "  ";
            if (c + 1 == row.size()) {
                out << row[c];
            } else {
                out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
            }
        }
        out << '\n';
    }
    if (include_timing)
        for (const auto& f : t.footnotes) out << "* " << f << '\n';
    return out.str();
}

}  // namespace inag::bench
