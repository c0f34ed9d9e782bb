#include "msr/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "msr/estimator.hpp"

namespace msr {

namespace {

constexpr std::array<const char*, kMomentItemCount> kMomentLabels = {"i", "ii",  "iii",  "iv", "v",
                                                                      "vi", "vii", "viii", "ix", "x"};

double dm(std::size_t m) { return static_cast<double>(m); }

/// Number of ordered index pairs among `count` items, zero below 2.
double pairs(double count) { return count >= 2.0 ? count * (count - 1.0) : 0.0; }

struct Moments {
    double e;   // E||Z||^4
    double z6;  // E||Z||^6
    double z8;  // E||Z||^8
    double iv;  // E(X'Y)^4
};

Moments basic_moments(std::size_t m_, const EnsembleMoments& ens)
{
    const double m = dm(m_);
    const double c2 = ens.c2, c3 = ens.c3, c4 = ens.c4;
    Moments out{};
    out.e = 1.0 + (c2 - 1.0) / m;
    out.z6 = 1.0 + 3.0 * (c2 - 1.0) / m + (c3 - 3.0 * c2 + 2.0) / (m * m);
    out.z8 = 1.0 + 6.0 * (c2 - 1.0) / m + (11.0 - 18.0 * c2 + 3.0 * c2 * c2 + 4.0 * c3) / (m * m) +
             (c4 - 4.0 * c3 - 3.0 * c2 * c2 + 12.0 * c2 - 6.0) / (m * m * m);
    out.iv = 3.0 / (m * m) + (c2 * c2 - 3.0) / (m * m * m);
    return out;
}

/// Per-sample E[T_uv] contribution rho*g1 + lambda0^2 (g2 + 2 g3).
double contribution(double rho, double lambda_sq, double g1, double g2, double g3)
{
    return rho * g1 + lambda_sq * (g2 + 2.0 * g3);
}

void check_m(std::size_t m)
{
    if (m == 0) throw std::invalid_argument("m must be at least 1");
}

}  // namespace

std::string moment_label(MomentItem item)
{
    return kMomentLabels.at(static_cast<std::size_t>(item));
}

MomentItem parse_moment_item(const std::string& label)
{
    for (std::size_t i = 0; i < kMomentLabels.size(); ++i)
        if (label == kMomentLabels[i]) return static_cast<MomentItem>(i);
    throw std::invalid_argument("unknown moment item '" + label + "'");
}

double moment_value(MomentItem item, std::size_t m_, const EnsembleMoments& ens)
{
    check_m(m_);
    const double m = dm(m_);
    const Moments mo = basic_moments(m_, ens);
    switch (item) {
    case MomentItem::NormZ4: return mo.e;
    case MomentItem::NormZ6: return mo.z6;
    case MomentItem::NormZ8: return mo.z8;
    case MomentItem::InnerXY4: return mo.iv;
    case MomentItem::NormZ4InnerZW2: return mo.z6 / m;
    case MomentItem::InnerXZ2XW2: return mo.e / (m * m);
    case MomentItem::NormZ2W2InnerZW2: return mo.e * mo.e / m;
    case MomentItem::NormZ2Cross: return mo.e / (m * m);
    case MomentItem::FourCycle: return 1.0 / (m * m * m);
    case MomentItem::InnerXY2: return 1.0 / m;
    }
    throw std::invalid_argument("unknown moment item");
}

GammaTerms gamma_terms(std::size_t k_, std::size_t m_, const EnsembleMoments& ens)
{
    check_m(m_);
    if (k_ == 0) throw std::invalid_argument("k must be at least 1");
    const double k = static_cast<double>(k_);
    const double m = dm(m_);
    const double m2 = m * m, m3 = m2 * m;
    const Moments mo = basic_moments(m_, ens);
    const double e = mo.e;
    const double km1 = k - 1.0;
    const double km2 = std::max(k - 2.0, 0.0);
    const double pairs_k = pairs(k);            // k(k-1)
    const double pairs_km1 = pairs(k - 1.0);    // (k-1)(k-2)
    const double pairs_km2 = pairs(k - 2.0);    // (k-2)(k-3)

    GammaTerms g;
    g.g1s = 2.0 * mo.z6 / m + km2 * e / m2;
    g.g1sd = mo.z6 / m + km1 * e / m2;
    g.g1d = k * e / m2;

    g.g2s = e * e + mo.iv + 2.0 * e * km2 / m + 2.0 * km2 * e / m2 + pairs_km2 / m2;
    g.g2sd = e * km1 / m + km1 * e / m2 + pairs_km1 / m2;
    g.g2d = pairs_k / m2;

    g.g3s = 2.0 * e * e / m + 4.0 * km2 * e / m2 + pairs_km2 / m3;
    g.g3sd = 2.0 * km1 * e / m2 + pairs_km1 / m3;
    g.g3d = pairs_k / m3;
    return g;
}

BlockMatrixSpec expected_affinity(const ModelParams& params)
{
    params.validate();
    const auto ens = EnsembleMoments::of(params.matrix_dist);
    const GammaTerms g = gamma_terms(params.k, params.m, ens);
    const Moments mo = basic_moments(params.m, ens);
    const double rho = params.rho();
    const double lsq = params.lambda0 * params.lambda0;
    const double k = static_cast<double>(params.k);
    const double l = static_cast<double>(params.l);
    const double m = dm(params.m);
    const double m2 = m * m;

    const double hs = contribution(rho, lsq, g.g1s, g.g2s, g.g3s);
    const double hsd = contribution(rho, lsq, g.g1sd, g.g2sd, g.g3sd);
    const double hd = contribution(rho, lsq, g.g1d, g.g2d, g.g3d);

    BlockMatrixSpec spec;
    spec.k = params.k;
    spec.l = params.l;
    spec.mu_on = hs / l + (l - 1.0) / l * hd;
    spec.mu_off = params.l >= 2 ? 2.0 / l * hsd + (l - 2.0) / l * hd : 0.0;

    const double ds = rho * (mo.z8 + (k - 1.0) * mo.iv) +
                      3.0 * lsq * (2.0 * (k - 1.0) * mo.z6 / m + pairs(k - 1.0) * mo.e / m2);
    const double dd = rho * k * mo.iv + 3.0 * lsq * pairs(k) * mo.e / m2;
    spec.mu0 = ds / l + (l - 1.0) / l * dd;

    const double bs = rho * (1.0 + (k - 1.0) / m2) + lsq * ((k - 1.0) / m + pairs(k - 1.0) / m2);
    const double bd = rho * k / m2 + lsq * pairs(k) / m2;
    spec.mu0_bound = bs / l + (l - 1.0) / l * bd;
    return spec;
}

Eigen::MatrixXd block_matrix(const BlockMatrixSpec& spec)
{
    if (spec.k == 0 || spec.l == 0) throw std::invalid_argument("block matrix needs k, l >= 1");
    const auto n = static_cast<Eigen::Index>(spec.k * spec.l);
    const auto k = static_cast<Eigen::Index>(spec.k);
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index v = 0; v < n; ++v)
        for (Eigen::Index u = 0; u < n; ++u) {
            if (u == v)
                t(u, v) = spec.mu0;
            else if (u / k == v / k)
                t(u, v) = spec.mu_on;
            else
                t(u, v) = spec.mu_off;
        }
    return t;
}

BlockSpectrum block_spectrum(const BlockMatrixSpec& spec)
{
    const double k = static_cast<double>(spec.k);
    const double l = static_cast<double>(spec.l);
    BlockSpectrum s;
    s.nu1 = spec.mu0 + (k - 1.0) * spec.mu_on + k * (l - 1.0) * spec.mu_off;
    s.nu_mid = spec.mu0 + (k - 1.0) * spec.mu_on - k * spec.mu_off;
    s.nu_low = spec.mu0 - spec.mu_on;
    s.gap = k * (spec.mu_on - spec.mu_off);
    return s;
}

double operator_norm_bound(const ModelParams& params)
{
    params.validate();
    const double k = static_cast<double>(params.k);
    const double l = static_cast<double>(params.l);
    const double m2 = dm(params.m) * dm(params.m);
    return params.rho() * k * k * l / m2 + params.lambda0 * params.lambda0 * k * k * k * l / m2;
}

SampleComplexity sample_complexity_bounds(const ModelParams& params, double eps, double delta)
{
    params.validate();
    const double k = static_cast<double>(params.k);
    const double l = static_cast<double>(params.l);
    const double kl = k * l;
    if (!(eps > 0.0) || eps > 1.0 / l) throw std::invalid_argument("eps must lie in (0, 1/l]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");

    SampleComplexity out;
    out.eps_used = std::max(eps, 1.0 / kl);
    const double outside = std::max(static_cast<double>(params.d) - kl, 1.0);
    const double m = dm(params.m);
    out.n_union = kl * kl / (m * m) * std::log(kl * outside / delta);
    const double log_k = std::log(k);
    out.n_cluster = std::pow(kl / m, 4.0) * std::pow(log_k, 4.0) * std::log(kl) * std::log(1.0 / delta) / out.eps_used;
    out.n_total = std::max(out.n_union, out.n_cluster);
    return out;
}

double quadratic_form_second_moment(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda0, double rho)
{
    if (a.size() != b.size()) throw std::invalid_argument("quadratic form: vectors differ in length");
    const Eigen::VectorXd p = a.cwiseProduct(b);
    const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), ab = p.sum();
    const double diag = p.squaredNorm();
    // sum_{i!=j} a_i^2 b_j^2 = |a|^2|b|^2 - sum a_i^2 b_i^2, likewise for a_i b_i a_j b_j
    const double cross = (a2 * b2 - diag) + 2.0 * (ab * ab - diag);
    return rho * diag + lambda0 * lambda0 * cross;
}

MonteCarloAffinity monte_carlo_affinity(const ModelParams& params, std::size_t n, std::uint64_t seed,
                                        std::size_t groups)
{
    params.validate();
    if (groups < 2) throw std::invalid_argument("jackknife needs at least 2 groups");
    if (n < groups) throw std::invalid_argument("monte_carlo_affinity: n smaller than the group count");

    ModelParams local = params;
    local.d = params.k * params.l;
    BatchOptions options;
    SupportTuple truth;
    for (std::size_t i = 0; i < params.l; ++i) {
        Support s(params.k);
        for (std::size_t t = 0; t < params.k; ++t) s[t] = i * params.k + t;
        truth.parts.push_back(std::move(s));
    }
    options.supports = truth;
    const SimulatedBatch batch = simulate_proxies(local, n, seed, options);
    const RowMatrix& a = batch.proxies.proxies;

    const auto size = static_cast<Eigen::Index>(local.d);
    const auto k = static_cast<Eigen::Index>(params.k);
    std::vector<Eigen::MatrixXd> sums;
    std::vector<double> counts;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t begin = g * n / groups;
        const std::size_t end = (g + 1) * n / groups;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(size, size);
        for (std::size_t j = begin; j < end; ++j) {
            const auto row = a.row(static_cast<Eigen::Index>(j));
            s.noalias() += row.transpose() * row;
        }
        sums.push_back(std::move(s));
        counts.push_back(static_cast<double>(end - begin));
    }

    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(size, size);
    for (const auto& s : sums) total += s;
    const double nn = static_cast<double>(n);

    auto block_average = [&](const Eigen::MatrixXd& t, std::array<double, 3>& out) {
        out = {0.0, 0.0, 0.0};
        std::array<double, 3> cnt = {0.0, 0.0, 0.0};
        for (Eigen::Index v = 0; v < size; ++v)
            for (Eigen::Index u = 0; u < size; ++u) {
                const int kind = u == v ? 0 : (u / k == v / k ? 1 : 2);
                out[static_cast<std::size_t>(kind)] += t(u, v);
                cnt[static_cast<std::size_t>(kind)] += 1.0;
            }
        for (std::size_t i = 0; i < 3; ++i) out[i] = cnt[i] > 0.0 ? out[i] / cnt[i] : 0.0;
    };

    MonteCarloAffinity out;
    out.groups = groups;
    out.mean = total / nn;
    std::array<double, 3> full{};
    block_average(out.mean, full);

    std::vector<Eigen::MatrixXd> loo;
    std::vector<std::array<double, 3>> loo_blocks(groups);
    Eigen::MatrixXd loo_mean = Eigen::MatrixXd::Zero(size, size);
    std::array<double, 3> loo_block_mean = {0.0, 0.0, 0.0};
    for (std::size_t g = 0; g < groups; ++g) {
        Eigen::MatrixXd t = (total - sums[g]) / (nn - counts[g]);
        block_average(t, loo_blocks[g]);
        for (std::size_t i = 0; i < 3; ++i) loo_block_mean[i] += loo_blocks[g][i];
        loo_mean += t;
        loo.push_back(std::move(t));
    }
    const double gg = static_cast<double>(groups);
    loo_mean /= gg;
    for (auto& v : loo_block_mean) v /= gg;

    const double factor = (gg - 1.0) / gg;
    out.se = Eigen::MatrixXd::Zero(size, size);
    std::array<double, 3> var = {0.0, 0.0, 0.0};
    for (std::size_t g = 0; g < groups; ++g) {
        out.se += (loo[g] - loo_mean).cwiseAbs2();
        for (std::size_t i = 0; i < 3; ++i) {
            const double diff = loo_blocks[g][i] - loo_block_mean[i];
            var[i] += diff * diff;
        }
    }
    out.se = (out.se * factor).cwiseSqrt();
    out.mu0 = {full[0], std::sqrt(factor * var[0])};
    out.mu_on = {full[1], std::sqrt(factor * var[1])};
    out.mu_off = {full[2], std::sqrt(factor * var[2])};
    return out;
}

}  // namespace msr
