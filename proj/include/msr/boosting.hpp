#pragma once

#include <cstddef>
#include <vector>

#include "msr/estimator.hpp"
#include "msr/model.hpp"

namespace msr {

/// Minimum over label permutations of sum_i |a_i Δ b_sigma(i)|.
struct MatchResult {
    std::size_t distance = 0;
    std::vector<std::size_t> permutation;  // a part i is matched with b part permutation[i]
};

std::size_t symmetric_difference_size(const Support& a, const Support& b);

/// Exact tuple distance. Brute force over permutations for l <= 6, Hungarian
/// algorithm above that. Throws on part-count mismatch.
MatchResult match_distance(const SupportTuple& a, const SupportTuple& b);

/// Both exact solvers, exposed for cross-checking.
MatchResult match_distance_brute_force(const SupportTuple& a, const SupportTuple& b);
MatchResult match_distance_hungarian(const SupportTuple& a, const SupportTuple& b);

struct BoostResult {
    SupportTuple estimate;
    std::size_t chosen_block = 0;
    /// False when no block was close to a majority and the median fallback was used.
    bool robust = true;
    std::vector<SupportTuple> block_estimates;
};

/// Median-trick boosting: recover on `blocks` contiguous equal blocks
/// (remainder dropped) and return the first block whose estimate lies within
/// fractional distance 2*eps of at least ceil(L/2) other blocks. Without such
/// a block, the estimate with the smallest median distance to the others is
/// returned and flagged non-robust.
BoostResult boosted_recover(const ProxyBatch& batch, std::size_t blocks, std::size_t k, std::size_t l, double eps,
                            const RecoveryOptions& options = {});
BoostResult boosted_recover(const Dataset& ds, std::size_t blocks, std::size_t k, std::size_t l, double eps,
                            const RecoveryOptions& options = {});

/// Block selection on precomputed estimates.
BoostResult select_boosted(std::vector<SupportTuple> block_estimates, std::size_t k, std::size_t l, double eps);

}  // namespace msr
