#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msr/model.hpp"
#include "msr/numerics.hpp"

namespace msr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-sample variance proxies (one row per sample) and their mean.
struct ProxyBatch {
    RowMatrix proxies;
    Eigen::VectorXd mean;

    std::size_t size() const { return static_cast<std::size_t>(proxies.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(proxies.cols()); }

    /// Rows [begin, begin + count) with their own mean.
    ProxyBatch slice(std::size_t begin, std::size_t count) const;
};

/// Entry i is (phi(:, i)^T y)^2.
Eigen::VectorXd variance_proxy(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y);

/// Coordinatewise mean with a fixed blocked reduction order.
Eigen::VectorXd mean_proxy(const RowMatrix& proxies);

ProxyBatch make_proxy_batch(const Dataset& ds);

/// Synthetic batch generated straight into proxy form; phi and x are never
/// stored. Proxies are bit-identical to make_proxy_batch(generate_batch(...)).
struct SimulatedBatch {
    ProxyBatch proxies;
    std::vector<std::size_t> labels;
    SupportTuple truth;
};

SimulatedBatch simulate_proxies(const ModelParams& params, std::size_t n, std::uint64_t seed,
                                const BatchOptions& options = {});

/// Indices of the `size` largest entries; ties go to the lower index. Sorted.
Support recover_union(const Eigen::VectorXd& lambda_tilde, std::size_t size);

/// Scree estimate: argmax over i in [1, d-1] of λ(i) / (λ(i+1) + floor) on the
/// descending sort. The first index wins ties.
std::size_t estimate_union_size(const Eigen::VectorXd& lambda_tilde, double floor = 1e-12);

/// The two largest scree ratios, returned as (smaller position, larger position).
/// For overlapping pairs the first marks the intersection size, the second the union size.
std::pair<std::size_t, std::size_t> estimate_two_drops(const Eigen::VectorXd& lambda_tilde, double floor = 1e-12);

/// T = (1/n) sum_j a_j a_j^T over proxies restricted to the union; gmap maps a
/// row of T back to its coordinate.
struct AffinityMatrix {
    Eigen::MatrixXd t;
    std::vector<Coord> gmap;
};

AffinityMatrix affinity_matrix(const RowMatrix& proxies, const Support& union_est);

struct ClusterResult {
    SupportTuple supports;
    Eigen::VectorXd eigenvalues;
    KMeansResult kmeans;
    std::size_t nonempty_groups = 0;
};

/// Spectral clustering of T: l leading eigenvectors, l-means on their rows,
/// row groups mapped through gmap. Supports are ordered by smallest member;
/// empty groups come last and are counted out of nonempty_groups.
ClusterResult cluster_supports(const AffinityMatrix& aff, std::size_t l, std::size_t restarts, std::uint64_t seed);

struct RecoveryOptions {
    /// Explicit union size. Defaults to k*l unless estimate_union is set.
    std::optional<std::size_t> union_size;
    bool estimate_union = false;
    double scree_floor = 1e-12;
    std::size_t restarts = 10;
    std::uint64_t seed = 0;
};

struct RecoveryDiagnostics {
    double kmeans_objective = 0.0;
    std::size_t restarts = 0;
    std::size_t best_restart = 0;
    std::size_t nonempty_groups = 0;
    std::size_t union_size = 0;
    bool union_size_estimated = false;
};

struct RecoveryResult {
    Support union_est;
    SupportTuple supports_est;
    Eigen::VectorXd eigenvalues;
    RecoveryDiagnostics diagnostics;
};

RecoveryResult recover(const ProxyBatch& batch, std::size_t k, std::size_t l, const RecoveryOptions& options = {});
RecoveryResult recover(const Dataset& ds, std::size_t k, std::size_t l, const RecoveryOptions& options = {});

/// Two possibly overlapping supports from the sign pattern of the second
/// leading eigenvector: entries above tau go to the first support, below -tau
/// to the second, and the band in between to both.
struct OverlapResult {
    Support first;
    Support second;
    Support union_est;
    Eigen::VectorXd second_vector;
    std::vector<Coord> gmap;
};

/// Threshold an already computed second eigenvector.
OverlapResult split_by_second_vector(const Eigen::VectorXd& v2, const std::vector<Coord>& gmap, double tau);

/// Union size comes from options (default 2k). The diagonal of T is dropped before the eigen step.
OverlapResult recover_overlapping_two(const ProxyBatch& batch, std::size_t k, double tau,
                                      const RecoveryOptions& options = {});
OverlapResult recover_overlapping_two(const Dataset& ds, std::size_t k, double tau,
                                      const RecoveryOptions& options = {});

}  // namespace msr
