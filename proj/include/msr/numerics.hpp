#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace msr {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Full spectrum of a symmetric matrix. values descending; column i of
/// vectors is the unit eigenvector for values[i], with its largest-magnitude
/// entry positive.
struct EigenDecomposition {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    int sweeps = 0;
    double off_norm = 0.0;
};

/// Cyclic Jacobi. The input is symmetrized by averaging; asymmetry above
/// 1e-10 (relative) is rejected. Sweeps until the off-diagonal Frobenius mass
/// is at most 1e-12 * ||A||_F, throwing ConvergenceError after 50 sweeps.
///
/// Ordering is fully deterministic: values descending; values equal within
/// 1e-10 (relative to the spectral radius) are ordered by the index of their
/// vector's largest-magnitude entry.
EigenDecomposition sym_eig(const Eigen::MatrixXd& a);

/// First `l` columns of sym_eig(a).vectors.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& a, std::size_t l);

struct KMeansResult {
    std::vector<std::size_t> assignments;
    Eigen::MatrixXd centers;  // l x c
    double objective = 0.0;
    /// Objective after each Lloyd iteration of the winning restart.
    std::vector<double> history;
    std::size_t best_restart = 0;
    std::size_t iterations = 0;
};

/// Best-of-`restarts` Lloyd's algorithm with k-means++ seeding. Restart r
/// draws from the substream (seed, r); ties between restarts go to the lowest
/// index. Empty clusters are reseeded with the point farthest from its center.
KMeansResult lloyd_kmeans(const Eigen::MatrixXd& rows, std::size_t l, std::size_t restarts,
                          std::uint64_t seed, std::size_t max_iterations = 100);

}  // namespace msr
