#include "msr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace msr {

namespace {

constexpr std::uint64_t kSupportStream = ~std::uint64_t{0};

/// First `count` entries of a partial Fisher-Yates shuffle of [0, d).
std::vector<Coord> sample_without_replacement(std::size_t d, std::size_t count, Rng& rng)
{
    std::vector<Coord> pool(d);
    std::iota(pool.begin(), pool.end(), Coord{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(d - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

double draw_entry(Ensemble e, double scale, Rng& rng)
{
    return e == Ensemble::Gaussian ? scale * rng.normal() : scale * rng.sign();
}

}  // namespace

std::string_view to_string(Ensemble e)
{
    return e == Ensemble::Gaussian ? "gaussian" : "rademacher";
}

Ensemble parse_ensemble(std::string_view name)
{
    if (name == "gaussian" || name == "Gaussian" || name == "g") return Ensemble::Gaussian;
    if (name == "rademacher" || name == "Rademacher" || name == "r") return Ensemble::Rademacher;
    throw std::invalid_argument("unknown ensemble: " + std::string(name));
}

void ModelParams::validate() const
{
    if (d == 0 || k == 0 || l == 0 || m == 0)
        throw std::invalid_argument("model dimensions d, k, l, m must be positive");
    if (k * l > d)
        throw std::invalid_argument("k*l = " + std::to_string(k * l) + " exceeds d = " + std::to_string(d));
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("lambda0 must be positive");
}

double ModelParams::rho() const
{
    return sample_dist == Ensemble::Gaussian ? 3.0 * lambda0 * lambda0 : lambda0 * lambda0;
}

Support SupportTuple::union_set() const
{
    Support all;
    for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

bool SupportTuple::pairwise_disjoint() const
{
    std::size_t total = 0;
    for (const auto& part : parts) total += part.size();
    return union_set().size() == total;
}

SupportTuple make_supports(const ModelParams& params, Rng& rng)
{
    params.validate();
    const auto coords = sample_without_replacement(params.d, params.k * params.l, rng);
    SupportTuple tuple;
    tuple.parts.reserve(params.l);
    for (std::size_t i = 0; i < params.l; ++i) {
        Support part(coords.begin() + static_cast<std::ptrdiff_t>(i * params.k),
                     coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * params.k));
        std::sort(part.begin(), part.end());
        tuple.parts.push_back(std::move(part));
    }
    return tuple;
}

SupportTuple make_overlapping_supports(std::size_t d, std::size_t k, std::size_t overlap, Rng& rng)
{
    if (k == 0 || overlap > k || 2 * k - overlap > d)
        throw std::invalid_argument("overlapping supports need 0 < k, overlap <= k, 2k - overlap <= d");
    const auto coords = sample_without_replacement(d, 2 * k - overlap, rng);
    Support first(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(k));
    Support second(coords.begin() + static_cast<std::ptrdiff_t>(k - overlap), coords.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return SupportTuple{{std::move(first), std::move(second)}};
}

Sample draw_sample(const ModelParams& params, const SupportTuple& supports, Rng& rng)
{
    params.validate();
    if (supports.size() != params.l) throw std::invalid_argument("support tuple must have l parts");
    Sample s;
    s.label = static_cast<std::size_t>(rng.below(params.l));
    s.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.d));
    const double scale = std::sqrt(params.lambda0);
    for (Coord c : supports.parts[s.label]) {
        if (c >= params.d) throw std::invalid_argument("support coordinate out of range");
        s.x[static_cast<Eigen::Index>(c)] = draw_entry(params.sample_dist, scale, rng);
    }
    return s;
}

Eigen::MatrixXd draw_measurement_matrix(const ModelParams& params, Rng& rng)
{
    if (params.m == 0 || params.d == 0) throw std::invalid_argument("measurement matrix needs m, d >= 1");
    const auto rows = static_cast<Eigen::Index>(params.m);
    const auto cols = static_cast<Eigen::Index>(params.d);
    Eigen::MatrixXd phi(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.m));
    double* data = phi.data();
    for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = draw_entry(params.matrix_dist, scale, rng);
    return phi;
}

SupportTuple batch_supports(const ModelParams& params, std::uint64_t seed)
{
    Rng rng = substream(seed, kSupportStream);
    return make_supports(params, rng);
}

void measure(const Eigen::MatrixXd& phi, const Support& support, const std::vector<double>& values,
             Eigen::VectorXd& y)
{
    y.setZero(phi.rows());
    for (std::size_t t = 0; t < support.size(); ++t) {
        const double v = values[t];
        const double* col = phi.col(static_cast<Eigen::Index>(support[t])).data();
        for (Eigen::Index r = 0; r < phi.rows(); ++r) y[r] += v * col[r];
    }
}

void draw_measured_sample(const ModelParams& params, const SupportTuple& supports, LabelMode mode,
                          std::uint64_t seed, std::size_t index, MeasuredSample& out)
{
    Rng rng = substream(seed, index);
    out.label = mode == LabelMode::Stratified ? index % params.l
                                              : static_cast<std::size_t>(rng.below(params.l));
    const Support& support = supports.parts[out.label];
    const double scale = std::sqrt(params.lambda0);
    out.values.resize(support.size());
    for (auto& v : out.values) v = draw_entry(params.sample_dist, scale, rng);

    const auto rows = static_cast<Eigen::Index>(params.m);
    const auto cols = static_cast<Eigen::Index>(params.d);
    out.phi.resize(rows, cols);
    const double phi_scale = 1.0 / std::sqrt(static_cast<double>(params.m));
    double* data = out.phi.data();
    for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = draw_entry(params.matrix_dist, phi_scale, rng);

    measure(out.phi, support, out.values, out.y);
}

Dataset generate_batch(const ModelParams& params, std::size_t n, std::uint64_t seed, const BatchOptions& options)
{
    params.validate();
    if (n == 0) throw std::invalid_argument("batch size n must be at least 1");

    Dataset ds;
    ds.params = params;
    ds.truth = options.supports ? *options.supports : batch_supports(params, seed);
    if (ds.truth->size() != params.l) throw std::invalid_argument("support tuple must have l parts");
    for (const auto& part : ds.truth->parts)
        for (Coord c : part)
            if (c >= params.d) throw std::invalid_argument("support coordinate out of range");

    ds.phis.reserve(n);
    ds.ys.reserve(n);
    ds.labels.reserve(n);
    MeasuredSample sample;
    for (std::size_t j = 0; j < n; ++j) {
        draw_measured_sample(params, *ds.truth, options.labels, seed, j, sample);
        ds.labels.push_back(sample.label);
        ds.ys.push_back(sample.y);
        if (options.retain_x) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.d));
            const Support& support = ds.truth->parts[sample.label];
            for (std::size_t t = 0; t < support.size(); ++t)
                x[static_cast<Eigen::Index>(support[t])] = sample.values[t];
            ds.xs.push_back(std::move(x));
        }
        ds.phis.push_back(std::move(sample.phi));
    }
    return ds;
}

}  // namespace msr
