#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "msr/model.hpp"

namespace msr {

class IdxError : public std::runtime_error {
public:
    enum class Kind { Io, BadMagic, Truncated, DimensionOverflow };

    IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// IDX image file (magic 0x00000803): count images of rows x cols bytes.
struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bytes;

    std::size_t pixels_per_image() const { return rows * cols; }
    /// Image i with pixels scaled to [0, 1].
    std::vector<double> image(std::size_t i) const;
};

/// IDX label file (magic 0x00000801).
struct IdxLabels {
    std::vector<std::uint8_t> labels;
};

IdxImages parse_idx_images(const std::filesystem::path& path);
IdxLabels parse_idx_labels(const std::filesystem::path& path);

IdxImages parse_idx_images(const std::vector<std::uint8_t>& data);
IdxLabels parse_idx_labels(const std::vector<std::uint8_t>& data);

std::vector<std::uint8_t> encode_idx(const IdxImages& images);
std::vector<std::uint8_t> encode_idx(const IdxLabels& labels);

void write_idx(const IdxImages& images, const std::filesystem::path& path);
void write_idx(const IdxLabels& labels, const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255): 255 on the mask, 0 elsewhere, row-major.
std::vector<std::uint8_t> encode_pgm(const Support& mask, std::size_t rows, std::size_t cols);
void emit_pgm(const Support& mask, std::size_t rows, std::size_t cols, const std::filesystem::path& path);

}  // namespace msr
