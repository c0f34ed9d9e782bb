#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

#include "msr/idx.hpp"
#include "msr/model.hpp"

namespace msr {

struct DigitsOptions {
    std::pair<int, int> digits{1, 5};
    std::size_t m = 100;
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    /// Masks are written here when set.
    std::optional<std::filesystem::path> out_dir;
};

struct DigitsResult {
    std::size_t rows = 0;
    std::size_t cols = 0;
    /// Estimated supports, one per chosen digit up to label swap.
    SupportTuple estimate;
    Support union_est;
    Support intersection_est;
    /// Per-class majority vote of pixels at or above 0.5. Reporting only.
    SupportTuple reference;
    std::size_t distance_to_reference = 0;
    std::size_t samples_per_digit[2] = {0, 0};
};

/// The first n images (in file order) whose label is one of the two digits are
/// vectorized, measured with fresh Gaussian m x d matrices, and fed to the
/// l = 2 pipeline. The two largest scree ratios give the intersection and
/// union sizes; the union minus the intersection is clustered spectrally and
/// the intersection is added to both estimates.
DigitsResult run_digits(const IdxImages& images, const IdxLabels& labels, const DigitsOptions& options);

}  // namespace msr
