#include "msr/estimator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace msr {

namespace {

constexpr std::size_t kReduceBlock = 4096;

/// Pairwise combination of per-block partial results, left to right.
template <typename T>
T pairwise_reduce(std::vector<T> parts)
{
    while (parts.size() > 1) {
        std::vector<T> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
        if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
        parts = std::move(next);
    }
    return std::move(parts.front());
}

std::vector<std::size_t> descending_order(const Eigen::VectorXd& values)
{
    std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[static_cast<Eigen::Index>(a)] > values[static_cast<Eigen::Index>(b)];
    });
    return order;
}

std::vector<double> scree_ratios(const Eigen::VectorXd& lambda_tilde, double floor)
{
    if (lambda_tilde.size() < 2) throw std::invalid_argument("scree estimate needs d >= 2");
    if (!(floor > 0.0)) throw std::invalid_argument("scree floor must be positive");
    const auto order = descending_order(lambda_tilde);
    std::vector<double> ratios(order.size() - 1);
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
        ratios[i] = lambda_tilde[static_cast<Eigen::Index>(order[i])] /
                    (lambda_tilde[static_cast<Eigen::Index>(order[i + 1])] + floor);
    return ratios;
}

std::size_t resolve_union_size(const ProxyBatch& batch, std::size_t default_size, const RecoveryOptions& options,
                               bool& estimated)
{
    estimated = false;
    if (options.union_size) return *options.union_size;
    if (options.estimate_union) {
        estimated = true;
        return estimate_union_size(batch.mean, options.scree_floor);
    }
    return default_size;
}

}  // namespace

ProxyBatch ProxyBatch::slice(std::size_t begin, std::size_t count) const
{
    if (count == 0 || begin + count > size()) throw std::invalid_argument("proxy slice out of range");
    ProxyBatch out;
    out.proxies = proxies.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
    out.mean = mean_proxy(out.proxies);
    return out;
}

Eigen::VectorXd variance_proxy(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y)
{
    if (phi.rows() != y.size()) throw std::invalid_argument("variance_proxy: phi rows must match y length");
    Eigen::VectorXd out(phi.cols());
    for (Eigen::Index i = 0; i < phi.cols(); ++i) {
        const double* col = phi.col(i).data();
        double dot = 0.0;
        for (Eigen::Index r = 0; r < phi.rows(); ++r) dot += col[r] * y[r];
        out[i] = dot * dot;
    }
    return out;
}

Eigen::VectorXd mean_proxy(const RowMatrix& proxies)
{
    const auto n = static_cast<std::size_t>(proxies.rows());
    if (n == 0) throw std::invalid_argument("mean_proxy needs at least one proxy");
    std::vector<Eigen::VectorXd> parts;
    for (std::size_t begin = 0; begin < n; begin += kReduceBlock) {
        const std::size_t end = std::min(n, begin + kReduceBlock);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(proxies.cols());
        for (std::size_t j = begin; j < end; ++j) sum += proxies.row(static_cast<Eigen::Index>(j)).transpose();
        parts.push_back(std::move(sum));
    }
    return pairwise_reduce(std::move(parts)) / static_cast<double>(n);
}

ProxyBatch make_proxy_batch(const Dataset& ds)
{
    if (ds.size() == 0) throw std::invalid_argument("dataset is empty");
    if (ds.phis.size() != ds.size()) throw std::invalid_argument("dataset has mismatched phi / y counts");
    ProxyBatch batch;
    batch.proxies.resize(static_cast<Eigen::Index>(ds.size()), ds.phis.front().cols());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        if (ds.phis[j].cols() != batch.proxies.cols())
            throw std::invalid_argument("dataset samples have inconsistent dimension d");
        batch.proxies.row(static_cast<Eigen::Index>(j)) = variance_proxy(ds.phis[j], ds.ys[j]).transpose();
    }
    batch.mean = mean_proxy(batch.proxies);
    return batch;
}

SimulatedBatch simulate_proxies(const ModelParams& params, std::size_t n, std::uint64_t seed,
                                const BatchOptions& options)
{
    params.validate();
    if (n == 0) throw std::invalid_argument("batch size n must be at least 1");
    SimulatedBatch out;
    out.truth = options.supports ? *options.supports : batch_supports(params, seed);
    out.labels.resize(n);
    out.proxies.proxies.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(params.d));
    MeasuredSample sample;
    for (std::size_t j = 0; j < n; ++j) {
        draw_measured_sample(params, out.truth, options.labels, seed, j, sample);
        out.labels[j] = sample.label;
        out.proxies.proxies.row(static_cast<Eigen::Index>(j)) = variance_proxy(sample.phi, sample.y).transpose();
    }
    out.proxies.mean = mean_proxy(out.proxies.proxies);
    return out;
}

Support recover_union(const Eigen::VectorXd& lambda_tilde, std::size_t size)
{
    if (size == 0 || size > static_cast<std::size_t>(lambda_tilde.size()))
        throw std::invalid_argument("recover_union: size must lie in [1, d]");
    auto order = descending_order(lambda_tilde);
    order.resize(size);
    std::sort(order.begin(), order.end());
    return Support(order.begin(), order.end());
}

std::size_t estimate_union_size(const Eigen::VectorXd& lambda_tilde, double floor)
{
    const auto ratios = scree_ratios(lambda_tilde, floor);
    const auto best = std::max_element(ratios.begin(), ratios.end());  // first maximum
    return static_cast<std::size_t>(best - ratios.begin()) + 1;
}

std::pair<std::size_t, std::size_t> estimate_two_drops(const Eigen::VectorXd& lambda_tilde, double floor)
{
    const auto ratios = scree_ratios(lambda_tilde, floor);
    if (ratios.size() < 2) throw std::invalid_argument("two-drop estimate needs d >= 3");
    std::vector<std::size_t> order(ratios.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratios[a] > ratios[b]; });
    const std::size_t a = order[0] + 1;
    const std::size_t b = order[1] + 1;
    return {std::min(a, b), std::max(a, b)};
}

AffinityMatrix affinity_matrix(const RowMatrix& proxies, const Support& union_est)
{
    if (union_est.empty()) throw std::invalid_argument("affinity_matrix: union estimate is empty");
    const auto n = static_cast<std::size_t>(proxies.rows());
    if (n == 0) throw std::invalid_argument("affinity_matrix: no proxies");

    AffinityMatrix aff;
    aff.gmap = union_est;
    std::sort(aff.gmap.begin(), aff.gmap.end());
    if (std::adjacent_find(aff.gmap.begin(), aff.gmap.end()) != aff.gmap.end())
        throw std::invalid_argument("affinity_matrix: union estimate has duplicates");
    if (aff.gmap.back() >= static_cast<std::size_t>(proxies.cols()))
        throw std::invalid_argument("affinity_matrix: union coordinate out of range");

    const auto size = static_cast<Eigen::Index>(aff.gmap.size());
    std::vector<Eigen::Index> cols(aff.gmap.begin(), aff.gmap.end());
    Eigen::VectorXd a(size);
    std::vector<Eigen::MatrixXd> parts;
    for (std::size_t begin = 0; begin < n; begin += kReduceBlock) {
        const std::size_t end = std::min(n, begin + kReduceBlock);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(size, size);
        for (std::size_t j = begin; j < end; ++j) {
            const double* row = proxies.row(static_cast<Eigen::Index>(j)).data();
            for (Eigen::Index u = 0; u < size; ++u) a[u] = row[cols[static_cast<std::size_t>(u)]];
            // upper triangle, column by column
            for (Eigen::Index v = 0; v < size; ++v) {
                const double av = a[v];
                double* col = sum.col(v).data();
                for (Eigen::Index u = 0; u <= v; ++u) col[u] += a[u] * av;
            }
        }
        parts.push_back(std::move(sum));
    }
    Eigen::MatrixXd total = pairwise_reduce(std::move(parts)) / static_cast<double>(n);
    for (Eigen::Index v = 0; v < size; ++v)
        for (Eigen::Index u = v + 1; u < size; ++u) total(u, v) = total(v, u);
    aff.t = std::move(total);
    return aff;
}

ClusterResult cluster_supports(const AffinityMatrix& aff, std::size_t l, std::size_t restarts, std::uint64_t seed)
{
    if (l == 0) throw std::invalid_argument("cluster_supports: l must be positive");
    const auto size = static_cast<std::size_t>(aff.t.rows());
    if (size != aff.gmap.size()) throw std::invalid_argument("cluster_supports: gmap size mismatch");
    if (l > size) throw std::invalid_argument("cluster_supports: more clusters than coordinates");

    const EigenDecomposition eig = sym_eig(aff.t);
    const Eigen::MatrixXd rows = eig.vectors.leftCols(static_cast<Eigen::Index>(l));

    ClusterResult out;
    out.eigenvalues = eig.values;
    out.kmeans = lloyd_kmeans(rows, l, restarts, seed);

    std::vector<Support> groups(l);
    for (std::size_t i = 0; i < size; ++i) groups[out.kmeans.assignments[i]].push_back(aff.gmap[i]);
    for (auto& g : groups) {
        if (g.empty()) continue;
        std::sort(g.begin(), g.end());
        out.supports.parts.push_back(std::move(g));
    }
    out.nonempty_groups = out.supports.parts.size();
    std::sort(out.supports.parts.begin(), out.supports.parts.end(),
              [](const Support& a, const Support& b) { return a.front() < b.front(); });
    out.supports.parts.resize(l);  // empty groups trail the nonempty ones
    return out;
}

RecoveryResult recover(const ProxyBatch& batch, std::size_t k, std::size_t l, const RecoveryOptions& options)
{
    if (k == 0 || l == 0) throw std::invalid_argument("recover: k and l must be positive");
    if (batch.size() == 0) throw std::invalid_argument("recover: empty batch");
    if (k * l > batch.dim()) throw std::invalid_argument("recover: k*l exceeds d");

    RecoveryResult result;
    bool estimated = false;
    const std::size_t union_size = resolve_union_size(batch, k * l, options, estimated);
    if (union_size < l) throw std::invalid_argument("recover: union size smaller than l");
    result.union_est = recover_union(batch.mean, union_size);

    const AffinityMatrix aff = affinity_matrix(batch.proxies, result.union_est);
    ClusterResult clusters = cluster_supports(aff, l, options.restarts, options.seed);

    result.supports_est = std::move(clusters.supports);
    result.eigenvalues = std::move(clusters.eigenvalues);
    result.diagnostics.kmeans_objective = clusters.kmeans.objective;
    result.diagnostics.restarts = std::max<std::size_t>(options.restarts, 1);
    result.diagnostics.best_restart = clusters.kmeans.best_restart;
    result.diagnostics.nonempty_groups = clusters.nonempty_groups;
    result.diagnostics.union_size = union_size;
    result.diagnostics.union_size_estimated = estimated;
    return result;
}

RecoveryResult recover(const Dataset& ds, std::size_t k, std::size_t l, const RecoveryOptions& options)
{
    return recover(make_proxy_batch(ds), k, l, options);
}

OverlapResult split_by_second_vector(const Eigen::VectorXd& v2, const std::vector<Coord>& gmap, double tau)
{
    if (!(tau > 0.0)) throw std::invalid_argument("overlap threshold tau must be positive");
    if (static_cast<std::size_t>(v2.size()) != gmap.size()) throw std::invalid_argument("gmap size mismatch");
    OverlapResult out;
    out.second_vector = v2;
    out.gmap = gmap;
    out.union_est = gmap;
    for (std::size_t i = 0; i < gmap.size(); ++i) {
        const double value = v2[static_cast<Eigen::Index>(i)];
        if (value >= -tau) out.first.push_back(gmap[i]);
        if (value <= tau) out.second.push_back(gmap[i]);
    }
    return out;
}

OverlapResult recover_overlapping_two(const ProxyBatch& batch, std::size_t k, double tau, const RecoveryOptions& options)
{
    if (!(tau > 0.0)) throw std::invalid_argument("overlap threshold tau must be positive");
    bool estimated = false;
    const std::size_t union_size = resolve_union_size(batch, 2 * k, options, estimated);
    if (union_size < 2) throw std::invalid_argument("overlap recovery needs a union of at least 2 coordinates");
    const Support union_est = recover_union(batch.mean, union_size);
    AffinityMatrix aff = affinity_matrix(batch.proxies, union_est);
    // shared coordinates carry a larger diagonal that would otherwise own v2
    aff.t.diagonal().setZero();
    const EigenDecomposition eig = sym_eig(aff.t);
    return split_by_second_vector(eig.vectors.col(1), aff.gmap, tau);
}

OverlapResult recover_overlapping_two(const Dataset& ds, std::size_t k, double tau, const RecoveryOptions& options)
{
    if (ds.params.l != 2) throw std::invalid_argument("overlap recovery is defined for l = 2 only");
    return recover_overlapping_two(make_proxy_batch(ds), k, tau, options);
}

}  // namespace msr
