#include "inag/nn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"

namespace inag::nn {

namespace {

constexpr const char* kMagic = "inag-densenet";
constexpr int kVersion = 1;

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next(const std::string& expected_tag) {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of checkpoint, wanted '" + expected_tag + "'");
        ++line_no_;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag != expected_tag) fail("expected '" + expected_tag + "', found '" + tag + "'");
        return ss;
    }

    double number(std::istringstream& ss) {
        std::string tok;
        if (!(ss >> tok)) fail("missing value");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') fail("bad number '" + tok + "'");
        return v;
    }

    template <typename T>
    T integer(std::istringstream& ss, const char* what) {
        T v{};
        if (!(ss >> v)) fail(std::string("bad ") + what);
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("checkpoint line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const DenseNet& net) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "seed " << net.seed() << '\n';
    out << "layers " << net.layer_count() << '\n';
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const auto& l = net.layers()[i];
        out << "layer " << i << ' ' << l.in_dim() << ' ' << l.out_dim() << ' ' << to_string(l.activation) << '\n';
        for (std::size_t r = 0; r < l.out_dim(); ++r) {
            out << 'w';
            for (double v : l.weight.row(r)) out << ' ' << hex(v);
            out << '\n';
        }
        out << 'b';
        for (double v : l.bias) out << ' ' << hex(v);
        out << '\n';
    }
    out << "end\n";
}

DenseNet read_checkpoint(std::istream& in) {
    LineReader reader(in);
    auto header = reader.next(kMagic);
    const int version = reader.integer<int>(header, "version");
    if (version != kVersion) reader.fail("unsupported checkpoint version " + std::to_string(version));
    auto seed_line = reader.next("seed");
    const auto seed = reader.integer<std::uint64_t>(seed_line, "seed");
    auto count_line = reader.next("layers");
    const auto count = reader.integer<std::size_t>(count_line, "layer count");

    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < count; ++i) {
        auto ll = reader.next("layer");
        const auto index = reader.integer<std::size_t>(ll, "layer index");
        if (index != i) reader.fail("layer index out of order");
        const auto in_dim = reader.integer<std::size_t>(ll, "input dim");
        const auto out_dim = reader.integer<std::size_t>(ll, "output dim");
        std::string act;
        ll >> act;
        DenseLayer layer{Matrix(out_dim, in_dim), std::vector<double>(out_dim), activation_from_string(act)};
        for (std::size_t r = 0; r < out_dim; ++r) {
            auto wl = reader.next("w");
            for (std::size_t c = 0; c < in_dim; ++c) layer.weight(r, c) = reader.number(wl);
        }
        auto bl = reader.next("b");
        for (std::size_t o = 0; o < out_dim; ++o) layer.bias[o] = reader.number(bl);
        layers.push_back(std::move(layer));
    }
    reader.next("end");
    return DenseNet(std::move(layers), seed);
}

void save_checkpoint(const std::filesystem::path& path, const DenseNet& net) {
    std::ostringstream out;
    write_checkpoint(out, net);
    write_file_atomic(path, out.str());
}

DenseNet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace inag::nn
