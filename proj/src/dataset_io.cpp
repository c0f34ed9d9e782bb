#include "msr/dataset_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace msr {

namespace {

constexpr std::array<char, 4> kMagic{'M', 'S', 'R', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kUnknownLabel = 255;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_) throw FormatError("cannot open for writing: " + path.string());
    }

    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u8(std::uint8_t v) { bytes(&v, 1); }

    void u32(std::uint64_t v)
    {
        if (v > std::numeric_limits<std::uint32_t>::max()) throw FormatError("value does not fit in u32");
        std::array<unsigned char, 4> b{};
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffU);
        bytes(b.data(), b.size());
    }

    void f64(double v)
    {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        std::array<unsigned char, 8> b{};
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffU);
        bytes(b.data(), b.size());
    }

    void finish()
    {
        out_.flush();
        if (!out_) throw FormatError("write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary)
    {
        if (!in_) throw FormatError("cannot open: " + path.string());
    }

    void bytes(void* p, std::size_t n)
    {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated MSR1 file");
    }

    std::uint8_t u8()
    {
        std::uint8_t v = 0;
        bytes(&v, 1);
        return v;
    }

    std::uint32_t u32()
    {
        std::array<unsigned char, 4> b{};
        bytes(b.data(), b.size());
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    double f64()
    {
        std::array<unsigned char, 8> b{};
        bytes(b.data(), b.size());
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return std::bit_cast<double>(v);
    }

private:
    std::ifstream in_;
};

}  // namespace

void write_msr1(const Dataset& ds, const std::filesystem::path& path)
{
    const auto& p = ds.params;
    const std::size_t n = ds.size();
    if (ds.phis.size() != n) throw FormatError("dataset has mismatched phi / y counts");
    if (!ds.labels.empty() && ds.labels.size() != n) throw FormatError("dataset has mismatched label count");

    Writer w(path);
    w.bytes(kMagic.data(), kMagic.size());
    w.u8(kVersion);
    w.u32(n);
    w.u32(p.m);
    w.u32(p.d);
    w.u32(p.l);
    w.u32(p.k);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& phi = ds.phis[j];
        if (phi.rows() != static_cast<Eigen::Index>(p.m) || phi.cols() != static_cast<Eigen::Index>(p.d) ||
            ds.ys[j].size() != static_cast<Eigen::Index>(p.m))
            throw FormatError("sample " + std::to_string(j) + " has wrong dimensions");
        for (Eigen::Index r = 0; r < phi.rows(); ++r)
            for (Eigen::Index c = 0; c < phi.cols(); ++c) w.f64(phi(r, c));
        for (Eigen::Index r = 0; r < ds.ys[j].size(); ++r) w.f64(ds.ys[j][r]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (ds.labels.empty()) {
            w.u8(kUnknownLabel);
        } else {
            if (ds.labels[j] >= kUnknownLabel) throw FormatError("label does not fit in u8");
            w.u8(static_cast<std::uint8_t>(ds.labels[j]));
        }
    }
    for (std::size_t i = 0; i < p.l; ++i) {
        if (!ds.truth) {
            w.u32(0);
            continue;
        }
        const auto& part = ds.truth->parts.at(i);
        w.u32(part.size());
        for (Coord c : part) w.u32(c);
    }
    w.finish();
}

Dataset read_msr1(const std::filesystem::path& path)
{
    Reader r(path);
    std::array<char, 4> magic{};
    r.bytes(magic.data(), magic.size());
    if (magic != kMagic) throw FormatError("bad magic: not an MSR1 file");
    const auto version = r.u8();
    if (version != kVersion) throw FormatError("unsupported MSR1 version " + std::to_string(version));

    Dataset ds;
    const std::size_t n = r.u32();
    ds.params.m = r.u32();
    ds.params.d = r.u32();
    ds.params.l = r.u32();
    ds.params.k = r.u32();
    if (n == 0 || ds.params.m == 0 || ds.params.d == 0 || ds.params.l == 0)
        throw FormatError("MSR1 header has a zero dimension");

    const auto m = static_cast<Eigen::Index>(ds.params.m);
    const auto d = static_cast<Eigen::Index>(ds.params.d);
    ds.phis.reserve(n);
    ds.ys.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Eigen::MatrixXd phi(m, d);
        for (Eigen::Index row = 0; row < m; ++row)
            for (Eigen::Index col = 0; col < d; ++col) phi(row, col) = r.f64();
        Eigen::VectorXd y(m);
        for (Eigen::Index row = 0; row < m; ++row) y[row] = r.f64();
        ds.phis.push_back(std::move(phi));
        ds.ys.push_back(std::move(y));
    }

    std::vector<std::size_t> labels(n);
    bool labels_known = true;
    for (auto& label : labels) {
        const auto v = r.u8();
        if (v == kUnknownLabel) labels_known = false;
        label = v;
    }
    if (labels_known) ds.labels = std::move(labels);

    SupportTuple truth;
    bool truth_known = true;
    for (std::size_t i = 0; i < ds.params.l; ++i) {
        const std::size_t count = r.u32();
        if (count == 0) truth_known = false;
        Support part(count);
        for (auto& c : part) {
            c = r.u32();
            if (c >= ds.params.d) throw FormatError("truth coordinate out of range");
        }
        truth.parts.push_back(std::move(part));
    }
    if (truth_known) ds.truth = std::move(truth);
    return ds;
}

}  // namespace msr
