#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "msr/rng.hpp"

namespace msr {

/// Distribution of the nonzero sample entries or of the measurement entries.
enum class Ensemble { Gaussian, Rademacher };

std::string_view to_string(Ensemble e);
Ensemble parse_ensemble(std::string_view name);

/// Generative model: ℓ disjoint supports of size k in [d], on-support entries
/// with variance lambda0, m measurements per sample with entry variance 1/m.
struct ModelParams {
    std::size_t d = 100;
    std::size_t k = 10;
    std::size_t l = 2;
    std::size_t m = 4;
    double lambda0 = 1.0;
    Ensemble sample_dist = Ensemble::Gaussian;
    Ensemble matrix_dist = Ensemble::Gaussian;

    /// Throws std::invalid_argument on k*l > d, zero sizes or lambda0 <= 0.
    void validate() const;

    /// Fourth moment of an on-support entry: 3*lambda0^2 (Gaussian) or lambda0^2.
    double rho() const;
};

using Coord = std::size_t;
/// Coordinate set, kept sorted ascending.
using Support = std::vector<Coord>;

/// Ordered list of ℓ coordinate sets. Parts are sorted; disjointness is a
/// property of generated tuples, not enforced on construction.
struct SupportTuple {
    std::vector<Support> parts;

    std::size_t size() const { return parts.size(); }
    Support union_set() const;
    bool pairwise_disjoint() const;

    bool operator==(const SupportTuple&) const = default;
};

/// ℓ disjoint uniformly random size-k subsets of [d]: kℓ distinct coordinates
/// drawn without replacement and split into consecutive groups of k.
SupportTuple make_supports(const ModelParams& params, Rng& rng);

/// Two size-k supports sharing exactly `overlap` coordinates (overlap experiments).
SupportTuple make_overlapping_supports(std::size_t d, std::size_t k, std::size_t overlap, Rng& rng);

struct Sample {
    std::size_t label = 0;
    Eigen::VectorXd x;
};

/// Mixture draw: uniform label, zero off supports[label], i.i.d. on-support
/// entries with variance lambda0.
Sample draw_sample(const ModelParams& params, const SupportTuple& supports, Rng& rng);

/// m x d matrix with i.i.d. N(0, 1/m) or ±1/sqrt(m) entries, filled column by column.
Eigen::MatrixXd draw_measurement_matrix(const ModelParams& params, Rng& rng);

enum class LabelMode { Uniform, Stratified };

struct BatchOptions {
    LabelMode labels = LabelMode::Uniform;
    bool retain_x = false;
    /// Use these supports instead of drawing fresh ones from the seed.
    std::optional<SupportTuple> supports;
};

struct Dataset {
    ModelParams params;
    std::vector<Eigen::MatrixXd> phis;
    std::vector<Eigen::VectorXd> ys;
    /// Empty when unknown.
    std::vector<std::size_t> labels;
    std::optional<SupportTuple> truth;
    /// Only populated with BatchOptions::retain_x.
    std::vector<Eigen::VectorXd> xs;

    std::size_t size() const { return ys.size(); }
};

/// One measured sample in sparse form; buffers are reused across draws.
struct MeasuredSample {
    std::size_t label = 0;
    std::vector<double> values;  // entries on supports[label], in coordinate order
    Eigen::MatrixXd phi;
    Eigen::VectorXd y;
};

/// Draws sample `index` of the batch rooted at `seed`. Every batch generator
/// goes through here so streamed and materialized batches agree bit for bit.
void draw_measured_sample(const ModelParams& params, const SupportTuple& supports,
                          LabelMode mode, std::uint64_t seed, std::size_t index,
                          MeasuredSample& out);

/// Supports for the batch rooted at `seed`.
SupportTuple batch_supports(const ModelParams& params, std::uint64_t seed);

/// y = sum over the support of x_t * phi(:, t), accumulated in coordinate order.
void measure(const Eigen::MatrixXd& phi, const Support& support, const std::vector<double>& values,
             Eigen::VectorXd& y);

/// n independent triples (phi_j, y_j = phi_j x_j, label_j).
Dataset generate_batch(const ModelParams& params, std::size_t n, std::uint64_t seed,
                       const BatchOptions& options = {});

}  // namespace msr
