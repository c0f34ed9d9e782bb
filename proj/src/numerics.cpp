#include "msr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msr/rng.hpp"

namespace msr {

namespace {

constexpr int kMaxSweeps = 50;
constexpr double kOffTolerance = 1e-12;
constexpr double kTieTolerance = 1e-10;

double off_diagonal_norm(const Eigen::MatrixXd& a)
{
    double sum = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index p = 0; p < q; ++p) sum += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(sum);
}

/// One rotation zeroing a(p, q). Columns p and q are updated in place and
/// mirrored into rows p and q.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q)
{
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    const Eigen::Index n = a.rows();
    double* colp = a.col(p).data();
    double* colq = a.col(q).data();
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double g = colp[r];
        const double h = colq[r];
        colp[r] = g - s * (h + g * tau);
        colq[r] = h + s * (g - h * tau);
    }
    colp[p] -= t * apq;
    colq[q] += t * apq;
    colp[q] = 0.0;
    colq[p] = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        a(p, r) = colp[r];
        a(q, r) = colq[r];
    }

    double* vp = v.col(p).data();
    double* vq = v.col(q).data();
    for (Eigen::Index r = 0; r < n; ++r) {
        const double g = vp[r];
        const double h = vq[r];
        vp[r] = g - s * (h + g * tau);
        vq[r] = h + s * (g - h * tau);
    }
}

Eigen::Index argmax_abs(const Eigen::Ref<const Eigen::VectorXd>& x)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) > std::abs(x[best])) best = i;
    return best;
}

double squared_distance(const Eigen::MatrixXd& rows, Eigen::Index i, const Eigen::MatrixXd& centers, Eigen::Index c)
{
    return (rows.row(i) - centers.row(c)).squaredNorm();
}

double objective_of(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& assign, const Eigen::MatrixXd& centers)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        total += squared_distance(rows, i, centers, static_cast<Eigen::Index>(assign[static_cast<std::size_t>(i)]));
    return total;
}

Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& rows, std::size_t l, Rng& rng)
{
    const Eigen::Index n = rows.rows();
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(l), rows.cols());
    std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = rows.row(first);
    for (std::size_t c = 1; c < l; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d2 = squared_distance(rows, i, centers, static_cast<Eigen::Index>(c - 1));
            auto& slot = dist[static_cast<std::size_t>(i)];
            slot = std::min(slot, d2);
            total += slot;
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double running = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                running += dist[static_cast<std::size_t>(i)];
                if (running > target && dist[static_cast<std::size_t>(i)] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(static_cast<Eigen::Index>(c)) = rows.row(pick);
    }
    return centers;
}

KMeansResult lloyd_once(const Eigen::MatrixXd& rows, std::size_t l, Rng& rng, std::size_t max_iterations)
{
    const Eigen::Index n = rows.rows();
    const auto nc = static_cast<Eigen::Index>(l);
    KMeansResult result;
    result.centers = seed_centers(rows, l, rng);
    result.assignments.assign(static_cast<std::size_t>(n), l);  // l = unassigned

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        std::vector<std::size_t> next(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d = squared_distance(rows, i, result.centers, 0);
            for (Eigen::Index c = 1; c < nc; ++c) {
                const double d2 = squared_distance(rows, i, result.centers, c);
                if (d2 < best_d) {
                    best_d = d2;
                    best = c;
                }
            }
            next[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
        }

        std::vector<std::size_t> counts(l, 0);
        for (auto a : next) ++counts[a];
        for (std::size_t c = 0; c < l; ++c) {
            if (counts[c] != 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto owner = next[static_cast<std::size_t>(i)];
                if (counts[owner] < 2) continue;
                const double d2 = squared_distance(rows, i, result.centers, static_cast<Eigen::Index>(owner));
                if (d2 > far_d) {
                    far_d = d2;
                    far = i;
                }
            }
            if (far < 0) break;
            --counts[next[static_cast<std::size_t>(far)]];
            next[static_cast<std::size_t>(far)] = c;
            ++counts[c];
        }

        if (next == result.assignments) break;
        result.assignments = std::move(next);

        result.centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i)
            result.centers.row(static_cast<Eigen::Index>(result.assignments[static_cast<std::size_t>(i)])) += rows.row(i);
        for (std::size_t c = 0; c < l; ++c)
            if (counts[c] > 0) result.centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);

        result.objective = objective_of(rows, result.assignments, result.centers);
        result.history.push_back(result.objective);
        result.iterations = iter + 1;
    }
    return result;
}

}  // namespace

EigenDecomposition sym_eig(const Eigen::MatrixXd& input)
{
    if (input.rows() != input.cols()) throw std::invalid_argument("sym_eig needs a square matrix");
    const Eigen::Index n = input.rows();
    EigenDecomposition out;
    if (n == 0) return out;
    if (!input.allFinite()) throw std::invalid_argument("sym_eig input has non-finite entries");

    const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
    if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("sym_eig input is not symmetric");

    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double frob = a.norm();

    int sweep = 0;
    double off = off_diagonal_norm(a);
    while (off > kOffTolerance * frob) {
        if (sweep == kMaxSweeps)
            throw ConvergenceError("Jacobi did not converge in " + std::to_string(kMaxSweeps) +
                                       " sweeps; off-diagonal norm " + std::to_string(off),
                                   off);
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
        ++sweep;
        off = off_diagonal_norm(a);
    }

    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index i = argmax_abs(v.col(j));
        if (v(i, j) < 0.0) v.col(j) = -v.col(j);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Eigen::VectorXd diag = a.diagonal();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return diag[x] > diag[y]; });

    const double radius = std::max(1.0, diag.cwiseAbs().maxCoeff());
    for (std::size_t begin = 0; begin < order.size();) {
        std::size_t end = begin + 1;
        while (end < order.size() && diag[order[end - 1]] - diag[order[end]] <= kTieTolerance * radius) ++end;
        if (end - begin > 1) {
            std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                             order.begin() + static_cast<std::ptrdiff_t>(end),
                             [&](Eigen::Index x, Eigen::Index y) { return argmax_abs(v.col(x)) < argmax_abs(v.col(y)); });
        }
        begin = end;
    }

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values[j] = diag[order[static_cast<std::size_t>(j)]];
        out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
    }
    out.sweeps = sweep;
    out.off_norm = off;
    return out;
}

Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& a, std::size_t l)
{
    if (l == 0 || l > static_cast<std::size_t>(a.rows()))
        throw std::invalid_argument("top_eigenvectors: l must lie in [1, N]");
    return sym_eig(a).vectors.leftCols(static_cast<Eigen::Index>(l));
}

KMeansResult lloyd_kmeans(const Eigen::MatrixXd& rows, std::size_t l, std::size_t restarts, std::uint64_t seed,
                          std::size_t max_iterations)
{
    if (l == 0 || l > static_cast<std::size_t>(rows.rows()))
        throw std::invalid_argument("lloyd_kmeans needs 1 <= l <= number of rows");
    restarts = std::max<std::size_t>(restarts, 1);

    KMeansResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng = substream(seed, r);
        KMeansResult run = lloyd_once(rows, l, rng, max_iterations);
        run.best_restart = r;
        if (r == 0 || run.objective < best.objective) best = std::move(run);
    }
    return best;
}

}  // namespace msr
