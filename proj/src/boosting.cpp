#include "msr/boosting.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace msr {

namespace {

constexpr std::size_t kBruteForceLimit = 6;

std::vector<std::vector<std::size_t>> cost_matrix(const SupportTuple& a, const SupportTuple& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("match_distance: tuples have " + std::to_string(a.size()) + " and " +
                                    std::to_string(b.size()) + " parts");
    const std::size_t l = a.size();
    std::vector<std::vector<std::size_t>> cost(l, std::vector<std::size_t>(l));
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) cost[i][j] = symmetric_difference_size(a.parts[i], b.parts[j]);
    return cost;
}

Support sorted_copy(const Support& s)
{
    Support out = s;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double median(std::vector<double> values)
{
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::size_t symmetric_difference_size(const Support& a, const Support& b)
{
    const Support sa = std::is_sorted(a.begin(), a.end()) ? a : sorted_copy(a);
    const Support sb = std::is_sorted(b.begin(), b.end()) ? b : sorted_copy(b);
    std::size_t i = 0, j = 0, common = 0;
    while (i < sa.size() && j < sb.size()) {
        if (sa[i] < sb[j]) {
            ++i;
        } else if (sb[j] < sa[i]) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    return sa.size() + sb.size() - 2 * common;
}

MatchResult match_distance_brute_force(const SupportTuple& a, const SupportTuple& b)
{
    const auto cost = cost_matrix(a, b);
    const std::size_t l = a.size();
    std::vector<std::size_t> perm(l);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    MatchResult best{std::numeric_limits<std::size_t>::max(), perm};
    do {
        std::size_t total = 0;
        for (std::size_t i = 0; i < l; ++i) total += cost[i][perm[i]];
        if (total < best.distance) best = {total, perm};
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (l == 0) best.distance = 0;
    return best;
}

MatchResult match_distance_hungarian(const SupportTuple& a, const SupportTuple& b)
{
    const auto cost = cost_matrix(a, b);
    const std::size_t n = a.size();
    MatchResult result;
    if (n == 0) return result;

    // Shortest augmenting path with potentials; 1-based with a virtual column 0.
    using Signed = long long;
    constexpr Signed kInf = std::numeric_limits<Signed>::max() / 4;
    std::vector<Signed> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = owner[j0];
            Signed delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const Signed cur = static_cast<Signed>(cost[i0 - 1][j - 1]) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    result.permutation.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) result.permutation[owner[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) result.distance += cost[i][result.permutation[i]];
    return result;
}

MatchResult match_distance(const SupportTuple& a, const SupportTuple& b)
{
    if (a.size() <= kBruteForceLimit) return match_distance_brute_force(a, b);
    return match_distance_hungarian(a, b);
}

BoostResult select_boosted(std::vector<SupportTuple> block_estimates, std::size_t k, std::size_t l, double eps)
{
    const std::size_t blocks = block_estimates.size();
    if (blocks == 0) throw std::invalid_argument("boosting needs at least one block estimate");
    if (!(eps > 0.0)) throw std::invalid_argument("boosting eps must be positive");
    const double scale = static_cast<double>(k * l);

    std::vector<std::vector<double>> frac(blocks, std::vector<double>(blocks, 0.0));
    for (std::size_t s = 0; s < blocks; ++s)
        for (std::size_t t = s + 1; t < blocks; ++t) {
            const double dist = static_cast<double>(match_distance(block_estimates[s], block_estimates[t]).distance) / scale;
            frac[s][t] = frac[t][s] = dist;
        }

    BoostResult out;
    const std::size_t needed = (blocks + 1) / 2;
    bool found = blocks == 1;
    for (std::size_t s = 0; s < blocks && !found; ++s) {
        std::size_t close = 0;
        for (std::size_t t = 0; t < blocks; ++t)
            if (t != s && frac[s][t] <= 2.0 * eps) ++close;
        if (close >= needed) {
            out.chosen_block = s;
            found = true;
        }
    }
    if (!found) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < blocks; ++s) {
            std::vector<double> others;
            for (std::size_t t = 0; t < blocks; ++t)
                if (t != s) others.push_back(frac[s][t]);
            const double med = median(std::move(others));
            if (med < best) {
                best = med;
                out.chosen_block = s;
            }
        }
        out.robust = false;
    }
    out.estimate = block_estimates[out.chosen_block];
    out.block_estimates = std::move(block_estimates);
    return out;
}

BoostResult boosted_recover(const ProxyBatch& batch, std::size_t blocks, std::size_t k, std::size_t l, double eps,
                            const RecoveryOptions& options)
{
    if (blocks == 0) throw std::invalid_argument("boosting needs at least one block");
    const std::size_t per_block = batch.size() / blocks;
    if (per_block == 0) throw std::invalid_argument("fewer samples than boosting blocks");

    std::vector<SupportTuple> estimates;
    estimates.reserve(blocks);
    std::size_t failures = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        try {
            estimates.push_back(recover(batch.slice(b * per_block, per_block), k, l, options).supports_est);
        } catch (const ConvergenceError&) {
            ++failures;
        }
    }
    if (failures == blocks) throw std::runtime_error("boosted_recover: recovery failed on every block");
    return select_boosted(std::move(estimates), k, l, eps);
}

BoostResult boosted_recover(const Dataset& ds, std::size_t blocks, std::size_t k, std::size_t l, double eps,
                            const RecoveryOptions& options)
{
    return boosted_recover(make_proxy_batch(ds), blocks, k, l, eps, options);
}

}  // namespace msr
