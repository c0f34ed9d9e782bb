#include "msr/idx.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace msr {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
// Guards count * rows * cols against overflow and absurd allocations.
constexpr std::uint64_t kMaxBytes = std::uint64_t{1} << 34;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError(IdxError::Kind::Io, "cannot open IDX file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::vector<std::uint8_t>& data, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IdxError(IdxError::Kind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IdxError(IdxError::Kind::Io, "write failed for " + path.string());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& data, std::size_t offset)
{
    if (data.size() < offset + 4)
        throw IdxError(IdxError::Kind::Truncated, "IDX header truncated at byte " + std::to_string(data.size()));
    return (std::uint32_t{data[offset]} << 24) | (std::uint32_t{data[offset + 1]} << 16) |
           (std::uint32_t{data[offset + 2]} << 8) | std::uint32_t{data[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint64_t value)
{
    if (value > std::numeric_limits<std::uint32_t>::max())
        throw IdxError(IdxError::Kind::DimensionOverflow, "IDX dimension does not fit in 32 bits");
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(value >> shift));
}

void check_magic(std::uint32_t got, std::uint32_t want)
{
    if (got != want) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "IDX magic 0x%08x, expected 0x%08x", got, want);
        throw IdxError(IdxError::Kind::BadMagic, buf);
    }
}

}  // namespace

std::vector<double> IdxImages::image(std::size_t i) const
{
    if (i >= count) throw std::out_of_range("IDX image index out of range");
    const std::size_t size = pixels_per_image();
    std::vector<double> out(size);
    for (std::size_t p = 0; p < size; ++p) out[p] = static_cast<double>(bytes[i * size + p]) / 255.0;
    return out;
}

IdxImages parse_idx_images(const std::vector<std::uint8_t>& data)
{
    check_magic(read_be32(data, 0), kImageMagic);
    IdxImages out;
    const std::uint64_t count = read_be32(data, 4);
    const std::uint64_t rows = read_be32(data, 8);
    const std::uint64_t cols = read_be32(data, 12);
    if (rows != 0 && cols != 0 && count > kMaxBytes / rows / cols)
        throw IdxError(IdxError::Kind::DimensionOverflow, "IDX image dimensions overflow");
    const std::uint64_t total = count * rows * cols;
    if (data.size() - 16 < total)
        throw IdxError(IdxError::Kind::Truncated, "IDX image data truncated: need " + std::to_string(total) +
                                                      " bytes, have " + std::to_string(data.size() - 16));
    out.count = static_cast<std::size_t>(count);
    out.rows = static_cast<std::size_t>(rows);
    out.cols = static_cast<std::size_t>(cols);
    out.bytes.assign(data.begin() + 16, data.begin() + 16 + static_cast<std::ptrdiff_t>(total));
    return out;
}

IdxLabels parse_idx_labels(const std::vector<std::uint8_t>& data)
{
    check_magic(read_be32(data, 0), kLabelMagic);
    const std::uint64_t count = read_be32(data, 4);
    if (data.size() - 8 < count)
        throw IdxError(IdxError::Kind::Truncated, "IDX label data truncated: need " + std::to_string(count) +
                                                      " bytes, have " + std::to_string(data.size() - 8));
    IdxLabels out;
    out.labels.assign(data.begin() + 8, data.begin() + 8 + static_cast<std::ptrdiff_t>(count));
    return out;
}

IdxImages parse_idx_images(const std::filesystem::path& path) { return parse_idx_images(read_file(path)); }
IdxLabels parse_idx_labels(const std::filesystem::path& path) { return parse_idx_labels(read_file(path)); }

std::vector<std::uint8_t> encode_idx(const IdxImages& images)
{
    if (images.bytes.size() != images.count * images.rows * images.cols)
        throw std::invalid_argument("IDX images: byte count does not match dimensions");
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.bytes.size());
    put_be32(out, kImageMagic);
    put_be32(out, images.count);
    put_be32(out, images.rows);
    put_be32(out, images.cols);
    out.insert(out.end(), images.bytes.begin(), images.bytes.end());
    return out;
}

std::vector<std::uint8_t> encode_idx(const IdxLabels& labels)
{
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.labels.size());
    put_be32(out, kLabelMagic);
    put_be32(out, labels.labels.size());
    out.insert(out.end(), labels.labels.begin(), labels.labels.end());
    return out;
}

void write_idx(const IdxImages& images, const std::filesystem::path& path) { write_file(encode_idx(images), path); }
void write_idx(const IdxLabels& labels, const std::filesystem::path& path) { write_file(encode_idx(labels), path); }

std::vector<std::uint8_t> encode_pgm(const Support& mask, std::size_t rows, std::size_t cols)
{
    const std::size_t size = rows * cols;
    const std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const std::size_t offset = out.size();
    out.resize(offset + size, 0);
    for (auto c : mask) {
        if (c >= size)
            throw std::invalid_argument("PGM mask coordinate " + std::to_string(c) + " outside " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
        out[offset + c] = 255;
    }
    return out;
}

void emit_pgm(const Support& mask, std::size_t rows, std::size_t cols, const std::filesystem::path& path)
{
    const auto data = encode_pgm(mask, rows, cols);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace msr
