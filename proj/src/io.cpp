#include "gbrbm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace gbrbm {

namespace {

constexpr std::array<unsigned char, 16> kBinaryMagic = {0x89, 'G', 'B', 'R', 'B', 'M', '-', 'C',
                                                        'K',  'P', 'T', '\r', '\n', 0x1A, '\n', 0x00};

void append_number(std::string& out, double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, ptr);
}

template <class Derived>
void append_array(std::string& out, const char* key, const Eigen::DenseBase<Derived>& values) {
    out += key;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        out += ' ';
        append_number(out, values.derived().data()[k]);
    }
    out += '\n';
}

double parse_number(std::string_view token, const std::string& what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw FormatError("checkpoint: bad number '" + std::string(token) + "' in " + what);
    }
    return value;
}

std::uint64_t parse_count(std::string_view token, const std::string& what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw FormatError("checkpoint: bad integer '" + std::string(token) + "' in " + what);
    }
    return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        const std::size_t end = line.find(' ', pos);
        const std::size_t stop = end == std::string_view::npos ? line.size() : end;
        if (stop > pos) out.push_back(line.substr(pos, stop - pos));
        pos = stop;
    }
    return out;
}

void read_array(const std::vector<std::string_view>& tokens, double* dest, std::size_t count, const std::string& key) {
    if (tokens.size() != count + 1) {
        throw FormatError("checkpoint: '" + key + "' expects " + std::to_string(count) + " values, found " +
                          std::to_string(tokens.size() - 1));
    }
    for (std::size_t k = 0; k < count; ++k) dest[k] = parse_number(tokens[k + 1], key);
}

// Little-endian primitive writer/reader for the binary variant.
struct ByteWriter {
    std::vector<unsigned char> bytes;

    void u64(std::uint64_t x) {
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>(x >> (8 * b)));
    }
    void u32(std::uint32_t x) {
        for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<unsigned char>(x >> (8 * b)));
    }
    void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct ByteReader {
    std::span<const unsigned char> bytes;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > bytes.size()) {
            throw FormatError("binary checkpoint truncated at byte offset " + std::to_string(pos));
        }
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t x = 0;
        for (int b = 0; b < 8; ++b) x |= static_cast<std::uint64_t>(bytes[pos + b]) << (8 * b);
        pos += 8;
        return x;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t x = 0;
        for (int b = 0; b < 4; ++b) x |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
        pos += 4;
        return x;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::size_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), len);
        pos += len;
        return s;
    }
};

void check_dims(std::uint64_t m, std::uint64_t n) {
    if (m == 0 || n == 0 || m > (1U << 24) || n > (1U << 24)) {
        throw FormatError("checkpoint: implausible model dimensions " + std::to_string(m) + "x" + std::to_string(n));
    }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    ckpt.params.validate();
    const RbmParams& p = ckpt.params;
    std::string out = "gbrbm-checkpoint " + std::to_string(ckpt.format_version) + "\n";
    out += "visible " + std::to_string(p.visible()) + "\n";
    out += "hidden " + std::to_string(p.hidden()) + "\n";
    out += "epoch " + std::to_string(ckpt.epoch) + "\n";
    out += "update_count " + std::to_string(ckpt.update_count) + "\n";
    out += "rng " + std::to_string(ckpt.rng.seed()) + " " + std::to_string(ckpt.rng.stream_id()) + " " +
           std::to_string(ckpt.rng.counter()) + "\n";
    for (const auto& [key, value] : ckpt.config) {
        if (key.empty() || key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
            throw FormatError("checkpoint: config entry '" + key + "' cannot be stored");
        }
        out += "config " + key + " " + value + "\n";
    }
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = p.weights;
    append_array(out, "weights", rows);
    append_array(out, "vbias", p.vbias);
    append_array(out, "hbias", p.hbias);
    append_array(out, "log_var", p.log_var);
    out += "end\n";
    return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Checkpoint ckpt;
    std::uint64_t m = 0;
    std::uint64_t n = 0;
    bool header = false;
    bool ended = false;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;
    std::size_t seen_arrays = 0;

    const auto ensure_dims = [&] {
        if (m == 0 || n == 0) throw FormatError("checkpoint: arrays appear before visible/hidden");
        if (ckpt.params.weights.size() == 0) {
            check_dims(m, n);
            ckpt.params = RbmParams(ModelDims{m, n});
            rows.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
        }
    };

    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (ended) {
            if (!line.empty()) throw FormatError("checkpoint: content after 'end' at line " + std::to_string(line_no));
            continue;
        }
        const auto tokens = split_spaces(line);
        if (tokens.empty()) continue;
        const std::string key(tokens.front());
        if (!header) {
            if (key != "gbrbm-checkpoint" || tokens.size() != 2) throw FormatError("checkpoint: missing header line");
            ckpt.format_version = static_cast<int>(parse_count(tokens[1], "header"));
            if (ckpt.format_version != kCheckpointVersion) {
                throw FormatError("checkpoint: unsupported format version " + std::to_string(ckpt.format_version));
            }
            header = true;
            continue;
        }
        if (key == "visible" && tokens.size() == 2) {
            m = parse_count(tokens[1], key);
        } else if (key == "hidden" && tokens.size() == 2) {
            n = parse_count(tokens[1], key);
        } else if (key == "epoch" && tokens.size() == 2) {
            ckpt.epoch = parse_count(tokens[1], key);
        } else if (key == "update_count" && tokens.size() == 2) {
            ckpt.update_count = parse_count(tokens[1], key);
        } else if (key == "rng" && tokens.size() == 4) {
            ckpt.rng = RngStream(parse_count(tokens[1], key), parse_count(tokens[2], key), parse_count(tokens[3], key));
        } else if (key == "config" && tokens.size() >= 2) {
            // "config <key> <value>": the value is everything after the first space following the key.
            const std::string_view rest = std::string_view(line).substr(line.find("config") + 7);
            const std::size_t space = rest.find(' ');
            std::string value = space == std::string_view::npos ? std::string() : std::string(rest.substr(space + 1));
            ckpt.config.emplace_back(std::string(tokens[1]), std::move(value));
        } else if (key == "weights") {
            ensure_dims();
            read_array(tokens, rows.data(), m * n, key);
            ckpt.params.weights = rows;
            ++seen_arrays;
        } else if (key == "vbias") {
            ensure_dims();
            read_array(tokens, ckpt.params.vbias.data(), m, key);
            ++seen_arrays;
        } else if (key == "hbias") {
            ensure_dims();
            read_array(tokens, ckpt.params.hbias.data(), n, key);
            ++seen_arrays;
        } else if (key == "log_var") {
            ensure_dims();
            read_array(tokens, ckpt.params.log_var.data(), m, key);
            ++seen_arrays;
        } else if (key == "end" && tokens.size() == 1) {
            ended = true;
        } else {
            throw FormatError("checkpoint: unrecognized record '" + key + "' at line " + std::to_string(line_no));
        }
    }
    if (!header) throw FormatError("checkpoint: empty input");
    if (!ended || seen_arrays != 4) throw FormatError("checkpoint: incomplete (missing arrays or 'end')");
    ckpt.params.validate();
    return ckpt;
}

std::vector<unsigned char> serialize_checkpoint_binary(const Checkpoint& ckpt) {
    ckpt.params.validate();
    const RbmParams& p = ckpt.params;
    ByteWriter w;
    w.bytes.assign(kBinaryMagic.begin(), kBinaryMagic.end());
    w.u32(static_cast<std::uint32_t>(ckpt.format_version));
    w.u64(p.visible());
    w.u64(p.hidden());
    w.u64(ckpt.epoch);
    w.u64(ckpt.update_count);
    w.u64(ckpt.rng.seed());
    w.u64(ckpt.rng.stream_id());
    w.u64(ckpt.rng.counter());
    w.u32(static_cast<std::uint32_t>(ckpt.config.size()));
    for (const auto& [key, value] : ckpt.config) {
        w.str(key);
        w.str(value);
    }
    for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.weights.cols(); ++j) w.f64(p.weights(i, j));
    }
    for (Eigen::Index i = 0; i < p.vbias.size(); ++i) w.f64(p.vbias[i]);
    for (Eigen::Index j = 0; j < p.hbias.size(); ++j) w.f64(p.hbias[j]);
    for (Eigen::Index i = 0; i < p.log_var.size(); ++i) w.f64(p.log_var[i]);
    return std::move(w.bytes);
}

bool is_binary_checkpoint(std::span<const unsigned char> bytes) {
    return bytes.size() >= kBinaryMagic.size() && std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), bytes.begin());
}

Checkpoint parse_checkpoint_binary(std::span<const unsigned char> bytes) {
    if (!is_binary_checkpoint(bytes)) throw FormatError("binary checkpoint: bad magic at byte offset 0");
    ByteReader r{bytes, kBinaryMagic.size()};
    Checkpoint ckpt;
    ckpt.format_version = static_cast<int>(r.u32());
    if (ckpt.format_version != kCheckpointVersion) {
        throw FormatError("binary checkpoint: unsupported format version " + std::to_string(ckpt.format_version));
    }
    const std::uint64_t m = r.u64();
    const std::uint64_t n = r.u64();
    check_dims(m, n);
    ckpt.epoch = r.u64();
    ckpt.update_count = r.u64();
    const std::uint64_t seed = r.u64();
    const std::uint64_t stream = r.u64();
    ckpt.rng = RngStream(seed, stream, r.u64());
    const std::uint32_t entries = r.u32();
    for (std::uint32_t e = 0; e < entries; ++e) {
        std::string key = r.str();
        ckpt.config.emplace_back(std::move(key), r.str());
    }
    ckpt.params = RbmParams(ModelDims{m, n});
    for (Eigen::Index i = 0; i < ckpt.params.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < ckpt.params.weights.cols(); ++j) ckpt.params.weights(i, j) = r.f64();
    }
    for (Eigen::Index i = 0; i < ckpt.params.vbias.size(); ++i) ckpt.params.vbias[i] = r.f64();
    for (Eigen::Index j = 0; j < ckpt.params.hbias.size(); ++j) ckpt.params.hbias[j] = r.f64();
    for (Eigen::Index i = 0; i < ckpt.params.log_var.size(); ++i) ckpt.params.log_var[i] = r.f64();
    if (r.pos != bytes.size()) {
        throw FormatError("binary checkpoint: trailing bytes at offset " + std::to_string(r.pos));
    }
    ckpt.params.validate();
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    if (binary) {
        const auto bytes = serialize_checkpoint_binary(ckpt);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    } else {
        out << serialize_checkpoint(ckpt);
    }
    if (!out) throw Error("failed to write " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (is_binary_checkpoint(bytes)) return parse_checkpoint_binary(bytes);
    return parse_checkpoint(std::string(bytes.begin(), bytes.end()));
}

std::vector<unsigned char> pgm_bytes(std::span<const double> pixels, std::size_t rows, std::size_t cols) {
    if (rows * cols != pixels.size() || pixels.empty()) throw ShapeError("PGM shape does not match the pixel count");
    const std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    const auto [lo_it, hi_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    for (double x : pixels) {
        if (!(hi > lo)) {
            out.push_back(128);
        } else {
            const double scaled = std::round((x - lo) / (hi - lo) * 255.0);
            out.push_back(static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0)));
        }
    }
    return out;
}

void export_pgm(std::span<const double> pixels, std::size_t rows, std::size_t cols, const std::filesystem::path& path) {
    const auto bytes = pgm_bytes(pixels, rows, cols);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed to write " + path.string());
}

}  // namespace gbrbm
