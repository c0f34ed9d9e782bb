#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "msr/model.hpp"

namespace msr {

/// Even-moment constants of a measurement ensemble: E[phi^(2q)] = c_q / m^q.
struct EnsembleMoments {
    double c2 = 3.0;
    double c3 = 15.0;
    double c4 = 105.0;

    static EnsembleMoments gaussian() { return {3.0, 15.0, 105.0}; }
    static EnsembleMoments rademacher() { return {1.0, 1.0, 1.0}; }
    static EnsembleMoments of(Ensemble e) { return e == Ensemble::Gaussian ? gaussian() : rademacher(); }
};

/// Inner-product moments of independent random m-vectors X, Y, Z, W with
/// i.i.d. entries of variance 1/m drawn from one ensemble.
enum class MomentItem {
    NormZ4,          // (i)    E||Z||^4
    NormZ6,          // (ii)   E||Z||^6
    NormZ8,          // (iii)  E||Z||^8
    InnerXY4,        // (iv)   E(X'Y)^4
    NormZ4InnerZW2,  // (v)    E||Z||^4 (Z'W)^2
    InnerXZ2XW2,     // (vi)   E(X'Z)^2 (X'W)^2
    NormZ2W2InnerZW2,  // (vii) E||Z||^2 ||W||^2 (Z'W)^2
    NormZ2Cross,     // (viii) E||Z||^2 (W'Z)(X'Z)(X'W)
    FourCycle,       // (ix)   E(Z'X)(Z'Y)(W'X)(W'Y)
    InnerXY2,        // (x)    E(X'Y)^2
};

inline constexpr std::size_t kMomentItemCount = 10;

/// Roman-numeral label, "i" through "x".
std::string moment_label(MomentItem item);
MomentItem parse_moment_item(const std::string& label);

double moment_value(MomentItem item, std::size_t m, const EnsembleMoments& ens);

/// Expected values of the three sums making up E[T_uv] for a single sample,
/// split by where u and v sit relative to the sample's support: both on it
/// (s), one on it (sd), neither (d).
struct GammaTerms {
    double g1s = 0, g1sd = 0, g1d = 0;
    double g2s = 0, g2sd = 0, g2d = 0;
    double g3s = 0, g3sd = 0, g3d = 0;
};

GammaTerms gamma_terms(std::size_t k, std::size_t m, const EnsembleMoments& ens);

/// E[T] under a permutation that groups the union by support: mu0 on the
/// diagonal, mu_on inside diagonal blocks, mu_off across blocks.
struct BlockMatrixSpec {
    double mu0 = 0.0;
    double mu_on = 0.0;
    double mu_off = 0.0;
    std::size_t k = 1;
    std::size_t l = 1;
    /// Leading-term upper bound on the diagonal with unit constants.
    double mu0_bound = 0.0;
};

BlockMatrixSpec expected_affinity(const ModelParams& params);

/// Explicit kl x kl matrix; coordinates [i*k, (i+1)*k) form block i.
Eigen::MatrixXd block_matrix(const BlockMatrixSpec& spec);

struct BlockSpectrum {
    double nu1 = 0.0;
    double nu_mid = 0.0;  // multiplicity l - 1
    double nu_low = 0.0;  // multiplicity l (k - 1)
    double gap = 0.0;
};

BlockSpectrum block_spectrum(const BlockMatrixSpec& spec);

/// rho k^2 l / m^2 + lambda0^2 k^3 l / m^2 (unit constant).
double operator_norm_bound(const ModelParams& params);

/// Order-of-magnitude sample sizes with unit constants and natural logs.
struct SampleComplexity {
    double n_union = 0.0;
    double n_cluster = 0.0;
    double n_total = 0.0;
    double eps_used = 0.0;
};

/// eps below 1/(kl) is raised to 1/(kl); eps <= 0, eps > 1/l and delta outside
/// (0, 1) are rejected.
SampleComplexity sample_complexity_bounds(const ModelParams& params, double eps, double delta);

/// E[(X'a b'X)^2] for X with independent zero-mean entries of variance lambda0
/// and fourth moment rho.
double quadratic_form_second_moment(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda0, double rho);

struct BlockEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// Affinity matrix on the exact union from n fresh samples with supports
/// {0..k-1}, {k..2k-1}, ... in dimension kl.
struct MonteCarloAffinity {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd se;
    BlockEstimate mu0;
    BlockEstimate mu_on;
    BlockEstimate mu_off;
    std::size_t groups = 0;
};

/// Standard errors are grouped-jackknife over `groups` contiguous sample groups.
MonteCarloAffinity monte_carlo_affinity(const ModelParams& params, std::size_t n, std::uint64_t seed,
                                        std::size_t groups = 200);

}  // namespace msr
