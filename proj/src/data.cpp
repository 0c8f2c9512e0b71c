#include "gbrbm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace gbrbm {

namespace {

constexpr unsigned char kIdxUnsignedByte = 0x08;
constexpr std::size_t kIdxHeaderBytes = 16;

std::uint32_t read_be32(std::span<const unsigned char> bytes, std::size_t offset) {
    return static_cast<std::uint32_t>(bytes[offset]) << 24 | static_cast<std::uint32_t>(bytes[offset + 1]) << 16 |
           static_cast<std::uint32_t>(bytes[offset + 2]) << 8 | static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::vector<unsigned char>& out, std::uint32_t value) {
    out.push_back(static_cast<unsigned char>(value >> 24));
    out.push_back(static_cast<unsigned char>(value >> 16));
    out.push_back(static_cast<unsigned char>(value >> 8));
    out.push_back(static_cast<unsigned char>(value));
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::unsplit: return "unsplit";
    }
    return "unsplit";
}

Vector Dataset::mean() const { return samples.colwise().mean().transpose(); }

SampleMatrix gather_rows(const SampleMatrix& data, std::span<const std::size_t> indices) {
    SampleMatrix out(static_cast<Eigen::Index>(indices.size()), data.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = data.row(static_cast<Eigen::Index>(indices[r]));
    }
    return out;
}

Dataset parse_idx(std::span<const unsigned char> bytes, const std::string& origin) {
    if (bytes.size() < 4) {
        throw FormatError(origin + ": truncated IDX header at byte offset " + std::to_string(bytes.size()) +
                          " (need 4 magic bytes)");
    }
    if (bytes[0] != 0 || bytes[1] != 0) throw FormatError(origin + ": bad IDX magic at byte offset 0");
    if (bytes[2] != kIdxUnsignedByte) {
        throw FormatError(origin + ": unsupported IDX element type at byte offset 2 (only 0x08 unsigned byte)");
    }
    if (bytes[3] != 3) {
        throw FormatError(origin + ": IDX rank at byte offset 3 is " + std::to_string(bytes[3]) + ", expected 3");
    }
    if (bytes.size() < kIdxHeaderBytes) {
        throw FormatError(origin + ": truncated IDX header at byte offset " + std::to_string(bytes.size()) +
                          " (need " + std::to_string(kIdxHeaderBytes) + " bytes)");
    }
    const std::size_t count = read_be32(bytes, 4);
    const std::size_t rows = read_be32(bytes, 8);
    const std::size_t cols = read_be32(bytes, 12);
    const std::size_t expected = count * rows * cols;
    const std::size_t actual = bytes.size() - kIdxHeaderBytes;
    if (actual != expected) {
        throw FormatError(origin + ": IDX payload at byte offset " + std::to_string(kIdxHeaderBytes) + " has " +
                          std::to_string(actual) + " bytes, expected " + std::to_string(expected));
    }
    if (count == 0 || rows * cols == 0) throw DomainError(origin + ": IDX file holds no samples");

    Dataset out;
    out.samples.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(rows * cols));
    const unsigned char* payload = bytes.data() + kIdxHeaderBytes;
    for (std::size_t k = 0; k < expected; ++k) out.samples.data()[k] = static_cast<double>(payload[k]) / 255.0;
    out.image_shape = ImageShape{rows, cols};
    out.preprocessing.push_back("load_idx(" + origin + ")");
    out.preprocessing.push_back("scale(1/255)");
    return out;
}

std::vector<unsigned char> serialize_idx(const Dataset& data) {
    if (!data.image_shape || data.image_shape->rows * data.image_shape->cols != data.dims()) {
        throw ShapeError("IDX output needs an image shape matching the sample dimension");
    }
    std::vector<unsigned char> out{0, 0, kIdxUnsignedByte, 3};
    write_be32(out, static_cast<std::uint32_t>(data.size()));
    write_be32(out, static_cast<std::uint32_t>(data.image_shape->rows));
    write_be32(out, static_cast<std::uint32_t>(data.image_shape->cols));
    out.reserve(out.size() + static_cast<std::size_t>(data.samples.size()));
    for (Eigen::Index k = 0; k < data.samples.size(); ++k) {
        const double scaled = std::round(data.samples.data()[k] * 255.0);
        out.push_back(static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0)));
    }
    return out;
}

Dataset load_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open IDX file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_idx(bytes, path.string());
}

void write_idx(const Dataset& data, const std::filesystem::path& path) {
    const auto bytes = serialize_idx(data);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed to write " + path.string());
}

Dataset parse_csv(const std::string& text, char delimiter, bool skip_header) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool header_pending = skip_header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const std::size_t row_index = rows.size();
        std::vector<double> values;
        std::size_t start = 0;
        while (true) {
            const std::size_t end = line.find(delimiter, start);
            std::string_view cell(line.data() + start, (end == std::string::npos ? line.size() : end) - start);
            while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
                throw FormatError("CSV row " + std::to_string(row_index) + ": non-numeric cell '" + std::string(cell) +
                                  "'");
            }
            values.push_back(value);
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw FormatError("CSV row " + std::to_string(row_index) + ": expected " +
                              std::to_string(rows.front().size()) + " columns, found " + std::to_string(values.size()));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DomainError("CSV input holds no samples");

    Dataset out;
    out.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            out.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path, char delimiter, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open CSV file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    Dataset out = parse_csv(text.str(), delimiter, skip_header);
    out.preprocessing.insert(out.preprocessing.begin(), "load_csv(" + path.string() + ")");
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, char delimiter) {
    const auto ext = path.extension().string();
    if (ext == ".csv" || ext == ".txt") return load_csv(path, delimiter);
    return load_idx(path);
}

std::pair<Dataset, Standardization> standardize(const Dataset& data, StandardizeScope scope) {
    if (data.size() < 2) throw DomainError("standardize needs at least two samples");
    Standardization stats;
    stats.scope = scope;
    const auto m = static_cast<Eigen::Index>(data.dims());
    if (scope == StandardizeScope::per_dimension) {
        stats.mean = data.mean();
        const SampleMatrix centered = data.samples.rowwise() - stats.mean.transpose();
        stats.std_dev = (centered.array().square().colwise().mean()).sqrt().transpose().matrix();
    } else {
        const double mean = data.samples.mean();
        const double var = (data.samples.array() - mean).square().mean();
        stats.mean = Vector::Constant(m, mean);
        stats.std_dev = Vector::Constant(m, std::sqrt(var));
    }
    stats.std_dev = stats.std_dev.cwiseMax(kStdFloor);

    Dataset out = data;
    out.samples = (data.samples.rowwise() - stats.mean.transpose()).array().rowwise() /
                  stats.std_dev.transpose().array();
    out.preprocessing.push_back(std::string("standardize(") +
                                (scope == StandardizeScope::global ? "global" : "per-dimension") + ", fit=" +
                                to_string(data.split) + ")");
    return {std::move(out), std::move(stats)};
}

Dataset apply_standardization(const Dataset& data, const Standardization& stats) {
    if (static_cast<std::size_t>(stats.mean.size()) != data.dims()) throw ShapeError("standardization dimension mismatch");
    Dataset out = data;
    out.samples = (data.samples.rowwise() - stats.mean.transpose()).array().rowwise() /
                  stats.std_dev.transpose().array();
    out.preprocessing.push_back(std::string("standardize(") +
                                (stats.scope == StandardizeScope::global ? "global" : "per-dimension") +
                                ", stats=train)");
    return out;
}

WhiteningTransform zca_fit(const Dataset& data, double epsilon) {
    if (data.size() < 2) throw DomainError("zca_fit needs at least two samples");
    if (!(epsilon > 0.0)) throw DomainError("zca epsilon must be positive");
    WhiteningTransform t;
    t.epsilon = epsilon;
    t.mean = data.mean();
    const SampleMatrix centered = data.samples.rowwise() - t.mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(data.size());
    if (!cov.allFinite()) throw NumericalError("covariance is not finite");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
    const Vector lambda = eig.eigenvalues().cwiseMax(0.0).array() + epsilon;
    const Matrix& basis = eig.eigenvectors();
    t.zca_matrix = basis * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * basis.transpose();
    t.unzca_matrix = basis * lambda.cwiseSqrt().asDiagonal() * basis.transpose();
    t.zca_matrix = 0.5 * (t.zca_matrix + t.zca_matrix.transpose()).eval();
    t.unzca_matrix = 0.5 * (t.unzca_matrix + t.unzca_matrix.transpose()).eval();
    return t;
}

Dataset zca_apply(const WhiteningTransform& transform, const Dataset& data) {
    if (static_cast<std::size_t>(transform.mean.size()) != data.dims()) throw ShapeError("zca dimension mismatch");
    Dataset out = data;
    out.samples = (data.samples.rowwise() - transform.mean.transpose()) * transform.zca_matrix;
    out.preprocessing.push_back("zca(eps=" + format_double(transform.epsilon) + ")");
    return out;
}

SampleMatrix zca_invert(const WhiteningTransform& transform, const SampleMatrix& whitened) {
    SampleMatrix out = whitened * transform.unzca_matrix;
    out.rowwise() += transform.mean.transpose();
    return out;
}

std::vector<std::size_t> shuffle_epoch(std::size_t size, RngStream& rng) {
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    // Fisher-Yates with multiply-shift bounded draws.
    for (std::size_t i = size; i > 1; --i) {
        const auto bound = static_cast<unsigned __int128>(i);
        const auto j = static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

Dataset synth_mixture(std::size_t num_components, std::size_t dims, std::size_t num_samples, double spread,
                      RngStream& rng, bool standardized) {
    if (num_components == 0 || dims == 0 || num_samples == 0) throw DomainError("synth_mixture counts must be >= 1");
    const double offset = 0.5 * static_cast<double>(num_components - 1);
    Dataset raw;
    raw.samples.resize(static_cast<Eigen::Index>(num_samples), static_cast<Eigen::Index>(dims));
    for (std::size_t s = 0; s < num_samples; ++s) {
        const auto k = std::min(num_components - 1,
                                      static_cast<std::size_t>(rng.uniform() * static_cast<double>(num_components)));
        for (std::size_t i = 0; i < dims; ++i) {
            const double centre = spread * (static_cast<double>((k + i) % num_components) - offset);
            raw.samples(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = centre + rng.normal();
        }
    }
    raw.split = Split::train;
    std::ostringstream tag;
    tag << "synth_mixture(components=" << num_components << ", dims=" << dims << ", samples=" << num_samples
        << ", spread=" << spread << ")";
    raw.preprocessing.push_back(tag.str());
    if (!standardized || num_samples < 2) return raw;
    return standardize(raw).first;
}

}  // namespace gbrbm
