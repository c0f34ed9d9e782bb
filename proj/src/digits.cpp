#include "msr/digits.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

#include "msr/boosting.hpp"
#include "msr/estimator.hpp"

namespace msr {

namespace {

constexpr double kBinarizeThreshold = 0.5;

Support majority_mask(const IdxImages& images, const std::vector<std::size_t>& members)
{
    const std::size_t size = images.pixels_per_image();
    std::vector<std::size_t> votes(size, 0);
    for (auto i : members)
        for (std::size_t p = 0; p < size; ++p)
            if (static_cast<double>(images.bytes[i * size + p]) / 255.0 >= kBinarizeThreshold) ++votes[p];
    Support out;
    for (std::size_t p = 0; p < size; ++p)
        if (2 * votes[p] > members.size()) out.push_back(p);
    return out;
}

}  // namespace

DigitsResult run_digits(const IdxImages& images, const IdxLabels& labels, const DigitsOptions& options)
{
    if (labels.labels.size() != images.count)
        throw std::invalid_argument("image and label files disagree on the sample count");
    if (options.digits.first == options.digits.second) throw std::invalid_argument("digits must differ");
    if (options.m == 0 || options.n == 0) throw std::invalid_argument("m and n must be positive");
    const std::size_t d = images.pixels_per_image();
    if (d < 3) throw std::invalid_argument("images too small for the two-drop heuristic");

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> by_digit[2];
    for (std::size_t i = 0; i < images.count && chosen.size() < options.n; ++i) {
        const int label = labels.labels[i];
        if (label == options.digits.first) by_digit[0].push_back(i);
        else if (label == options.digits.second) by_digit[1].push_back(i);
        else continue;
        chosen.push_back(i);
    }
    if (chosen.size() < options.n)
        throw std::invalid_argument("only " + std::to_string(chosen.size()) + " images of digits " +
                                    std::to_string(options.digits.first) + "," +
                                    std::to_string(options.digits.second) + " available, " +
                                    std::to_string(options.n) + " requested");

    ModelParams params;
    params.d = d;
    params.k = 1;
    params.l = 2;
    params.m = options.m;
    params.matrix_dist = Ensemble::Gaussian;

    ProxyBatch batch;
    batch.proxies.resize(static_cast<Eigen::Index>(options.n), static_cast<Eigen::Index>(d));
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < options.n; ++j) {
        const std::size_t offset = chosen[j] * d;
        for (std::size_t p = 0; p < d; ++p) x[static_cast<Eigen::Index>(p)] = images.bytes[offset + p] / 255.0;
        Rng rng = substream(options.seed, j);
        const Eigen::MatrixXd phi = draw_measurement_matrix(params, rng);
        const Eigen::VectorXd y = phi * x;
        batch.proxies.row(static_cast<Eigen::Index>(j)) = variance_proxy(phi, y).transpose();
    }
    batch.mean = mean_proxy(batch.proxies);

    DigitsResult out;
    out.rows = images.rows;
    out.cols = images.cols;
    out.samples_per_digit[0] = by_digit[0].size();
    out.samples_per_digit[1] = by_digit[1].size();

    const auto [inter_size, union_size] = estimate_two_drops(batch.mean);
    out.union_est = recover_union(batch.mean, union_size);
    out.intersection_est = recover_union(batch.mean, inter_size);
    Support rest;
    std::set_difference(out.union_est.begin(), out.union_est.end(), out.intersection_est.begin(),
                        out.intersection_est.end(), std::back_inserter(rest));
    if (rest.size() < 2) throw std::runtime_error("two-drop heuristic left fewer than two coordinates to split");

    const AffinityMatrix aff = affinity_matrix(batch.proxies, rest);
    const ClusterResult clusters = cluster_supports(aff, 2, options.restarts, hash_combine(options.seed, 2));
    out.estimate = clusters.supports;
    for (auto& part : out.estimate.parts) {
        part.insert(part.end(), out.intersection_est.begin(), out.intersection_est.end());
        std::sort(part.begin(), part.end());
    }

    out.reference.parts = {majority_mask(images, by_digit[0]), majority_mask(images, by_digit[1])};
    out.distance_to_reference = match_distance(out.reference, out.estimate).distance;

    if (options.out_dir) {
        std::filesystem::create_directories(*options.out_dir);
        for (std::size_t i = 0; i < 2; ++i) {
            emit_pgm(out.estimate.parts[i], out.rows, out.cols, *options.out_dir / ("support_" + std::to_string(i + 1) + ".pgm"));
            emit_pgm(out.reference.parts[i], out.rows, out.cols,
                     *options.out_dir / ("reference_" + std::to_string(i + 1) + ".pgm"));
        }
    }
    return out;
}

}  // namespace msr
