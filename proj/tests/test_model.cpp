#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <set>

#include "msr/dataset_io.hpp"
#include "msr/model.hpp"

using namespace msr;

namespace {

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

template <typename F>
Stats mc_mean(std::size_t draws, F&& sample)
{
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double v = sample();
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

bool within(const Stats& s, double expected, double k = 3.0)
{
    return std::abs(s.mean - expected) <= k * s.se + 1e-12 * std::abs(expected);
}

ModelParams params_of(std::size_t d, std::size_t k, std::size_t l, std::size_t m, Ensemble e = Ensemble::Gaussian)
{
    ModelParams p;
    p.d = d;
    p.k = k;
    p.l = l;
    p.m = m;
    p.sample_dist = p.matrix_dist = e;
    return p;
}

}  // namespace

TEST_CASE("params validation")
{
    ModelParams p = params_of(4, 2, 2, 1);
    CHECK_NOTHROW(p.validate());
    p.k = 3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = params_of(10, 2, 2, 1);
    p.lambda0 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.lambda0 = 2.0;
    CHECK(p.rho() == doctest::Approx(12.0));
    p.sample_dist = Ensemble::Rademacher;
    CHECK(p.rho() == doctest::Approx(4.0));
}

TEST_CASE("make_supports")
{
    SUBCASE("pigeonhole when kl = d")
    {
        Rng rng(1);
        const auto s = make_supports(params_of(4, 2, 2, 1), rng);
        REQUIRE(s.size() == 2);
        CHECK(s.pairwise_disjoint());
        CHECK(s.union_set() == Support{0, 1, 2, 3});
    }
    SUBCASE("two disjoint 10-sets in d=100")
    {
        Rng rng(7);
        const auto s = make_supports(params_of(100, 10, 2, 4), rng);
        REQUIRE(s.size() == 2);
        for (const auto& part : s.parts) {
            CHECK(part.size() == 10);
            CHECK(std::is_sorted(part.begin(), part.end()));
            CHECK(part.back() < 100);
        }
        std::set<Coord> a(s.parts[0].begin(), s.parts[0].end());
        for (auto c : s.parts[1]) CHECK(a.count(c) == 0);
    }
    SUBCASE("same seed, same output")
    {
        Rng r1(42), r2(42);
        CHECK(make_supports(params_of(50, 5, 3, 2), r1) == make_supports(params_of(50, 5, 3, 2), r2));
    }
    SUBCASE("k*l > d rejected")
    {
        Rng rng(0);
        CHECK_THROWS_AS(make_supports(params_of(5, 3, 2, 1), rng), std::invalid_argument);
    }
    SUBCASE("disjoint over many seeds")
    {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            Rng rng(seed);
            CHECK(make_supports(params_of(30, 4, 5, 2), rng).pairwise_disjoint());
        }
    }
    SUBCASE("every coordinate is reachable")
    {
        std::vector<std::size_t> hits(20, 0);
        for (std::uint64_t seed = 0; seed < 4000; ++seed) {
            Rng rng(seed);
            for (const auto& part : make_supports(params_of(20, 2, 2, 1), rng).parts)
                for (auto c : part) ++hits[c];
        }
        // each coordinate appears with probability 4/20 per draw: 800 expected, sd about 25
        for (auto h : hits) CHECK(std::abs(static_cast<double>(h) - 800.0) < 150.0);
    }
}

TEST_CASE("overlapping supports")
{
    Rng rng(3);
    const auto s = make_overlapping_supports(60, 6, 2, rng);
    REQUIRE(s.size() == 2);
    CHECK(s.parts[0].size() == 6);
    CHECK(s.parts[1].size() == 6);
    CHECK(s.union_set().size() == 10);
    CHECK_THROWS_AS(make_overlapping_supports(5, 6, 2, rng), std::invalid_argument);
}

TEST_CASE("draw_sample")
{
    const ModelParams p = params_of(30, 4, 3, 2);
    Rng srng(11);
    const auto supports = make_supports(p, srng);
    Rng rng(5);
    SUBCASE("support of x lies inside its label's support")
    {
        for (int i = 0; i < 500; ++i) {
            const auto s = draw_sample(p, supports, rng);
            REQUIRE(s.label < p.l);
            std::set<Coord> allowed(supports.parts[s.label].begin(), supports.parts[s.label].end());
            std::size_t nnz = 0;
            for (Eigen::Index c = 0; c < s.x.size(); ++c)
                if (s.x[c] != 0.0) {
                    ++nnz;
                    CHECK(allowed.count(static_cast<Coord>(c)) == 1);
                }
            CHECK(nnz <= p.k);
        }
    }
    SUBCASE("Gaussian on-support moments")
    {
        ModelParams g = params_of(4, 1, 1, 1);
        SupportTuple single{{{0}}};
        Rng r(99);
        std::vector<double> v(1000000);
        for (auto& x : v) x = draw_sample(g, single, r).x[0];
        std::size_t i = 0;
        CHECK(within(mc_mean(v.size(), [&] { const double x = v[i++]; return x * x; }), 1.0));
        i = 0;
        CHECK(within(mc_mean(v.size(), [&] { const double x = v[i++]; return x * x * x * x; }), 3.0));
    }
    SUBCASE("Rademacher on-support entries are exactly ±sqrt(lambda0)")
    {
        ModelParams r = params_of(4, 2, 1, 1, Ensemble::Rademacher);
        r.lambda0 = 2.25;
        SupportTuple single{{{1, 3}}};
        Rng g(4);
        for (int i = 0; i < 200; ++i) {
            const auto s = draw_sample(r, single, g);
            CHECK(std::abs(s.x[1]) == 1.5);
            CHECK(std::abs(s.x[3]) == 1.5);
        }
    }
    SUBCASE("label frequencies")
    {
        std::vector<std::size_t> counts(p.l, 0);
        const std::size_t draws = 100000;
        for (std::size_t i = 0; i < draws; ++i) ++counts[draw_sample(p, supports, rng).label];
        const double q = 1.0 / static_cast<double>(p.l);
        const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(draws));
        for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / draws - q) <= 3.0 * se);
    }
}

TEST_CASE("draw_measurement_matrix")
{
    SUBCASE("Rademacher entries are ±1/sqrt(m)")
    {
        Rng rng(8);
        const auto phi = draw_measurement_matrix(params_of(50, 2, 2, 4, Ensemble::Rademacher), rng);
        CHECK(phi.rows() == 4);
        CHECK(phi.cols() == 50);
        for (Eigen::Index i = 0; i < phi.size(); ++i) CHECK(std::abs(phi.data()[i]) == 0.5);
    }
    SUBCASE("Gaussian moments")
    {
        auto moment = [](std::size_t m, int power, double expected) {
            const ModelParams p = params_of(1000, 1, 1, m);
            Rng rng(1234 + m + static_cast<std::uint64_t>(power));
            std::vector<double> v;
            v.reserve(1000000);
            while (v.size() < 1000000) {
                const auto phi = draw_measurement_matrix(p, rng);
                for (Eigen::Index i = 0; i < phi.size() && v.size() < 1000000; ++i) v.push_back(phi.data()[i]);
            }
            std::size_t i = 0;
            return within(mc_mean(v.size(), [&] { return std::pow(v[i++], power); }), expected);
        };
        CHECK(moment(4, 2, 0.25));
        CHECK(moment(2, 4, 0.75));
        CHECK(moment(2, 6, 15.0 / 8.0));
        CHECK(moment(2, 8, 105.0 / 16.0));
    }
}

TEST_CASE("generate_batch")
{
    const ModelParams p = params_of(40, 3, 2, 3);
    SUBCASE("n=0 rejected")
    {
        CHECK_THROWS_AS(generate_batch(p, 0, 1), std::invalid_argument);
    }
    SUBCASE("y equals phi x exactly")
    {
        BatchOptions o;
        o.retain_x = true;
        const auto ds = generate_batch(p, 50, 9, o);
        REQUIRE(ds.xs.size() == 50);
        for (std::size_t j = 0; j < ds.size(); ++j) {
            for (Eigen::Index r = 0; r < ds.phis[j].rows(); ++r) {
                double y = 0.0;
                for (Eigen::Index c = 0; c < ds.phis[j].cols(); ++c) y += ds.phis[j](r, c) * ds.xs[j][c];
                CHECK(ds.ys[j][r] == y);
            }
            std::set<Coord> allowed(ds.truth->parts[ds.labels[j]].begin(), ds.truth->parts[ds.labels[j]].end());
            for (Eigen::Index c = 0; c < ds.xs[j].size(); ++c)
                if (ds.xs[j][c] != 0.0) CHECK(allowed.count(static_cast<Coord>(c)) == 1);
        }
    }
    SUBCASE("n=1")
    {
        const auto ds = generate_batch(p, 1, 2);
        CHECK(ds.size() == 1);
        CHECK(ds.phis.front().rows() == 3);
        CHECK(ds.xs.empty());
    }
    SUBCASE("stratified labels")
    {
        BatchOptions o;
        o.labels = LabelMode::Stratified;
        const auto ds = generate_batch(params_of(100, 10, 2, 4), 100, 3, o);
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), 0u) == 50);
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1u) == 50);
    }
    SUBCASE("deterministic")
    {
        const auto a = generate_batch(p, 20, 77);
        const auto b = generate_batch(p, 20, 77);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(a.ys[j] == b.ys[j]);
            CHECK(a.phis[j] == b.phis[j]);
        }
        CHECK(a.labels == b.labels);
        CHECK(a.truth == b.truth);
        const auto c = generate_batch(p, 20, 78);
        CHECK(c.ys[0] != a.ys[0]);
    }
    SUBCASE("samples depend only on their index")
    {
        const auto a = generate_batch(p, 30, 5);
        const auto b = generate_batch(p, 10, 5);
        for (std::size_t j = 0; j < b.size(); ++j) CHECK(a.ys[j] == b.ys[j]);
    }
    SUBCASE("explicit supports")
    {
        BatchOptions o;
        o.supports = SupportTuple{{{0, 1, 2}, {3, 4, 5}}};
        CHECK(*generate_batch(p, 3, 1, o).truth == *o.supports);
        o.supports = SupportTuple{{{0, 1, 2}}};
        CHECK_THROWS_AS(generate_batch(p, 3, 1, o), std::invalid_argument);
    }
}

TEST_CASE("MSR1 round trip")
{
    const ModelParams p = params_of(12, 2, 3, 2);
    const auto ds = generate_batch(p, 7, 21);
    const auto path = std::filesystem::temp_directory_path() / "msr_test_roundtrip.msr1";
    write_msr1(ds, path);
    const auto back = read_msr1(path);
    CHECK(back.size() == ds.size());
    CHECK(back.params.d == 12);
    CHECK(back.params.k == 2);
    CHECK(back.params.l == 3);
    CHECK(back.params.m == 2);
    for (std::size_t j = 0; j < ds.size(); ++j) {
        CHECK(back.phis[j] == ds.phis[j]);
        CHECK(back.ys[j] == ds.ys[j]);
    }
    CHECK(back.labels == ds.labels);
    REQUIRE(back.truth.has_value());
    CHECK(*back.truth == *ds.truth);

    SUBCASE("bad magic")
    {
        {
            std::ofstream out(path, std::ios::binary);
            out << "MSR2xxxxxxxxxxxxxxxxxxxxxxxxxxxx";
        }
        CHECK_THROWS_AS(read_msr1(path), FormatError);
    }
    SUBCASE("truncated")
    {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
        CHECK_THROWS_AS(read_msr1(path), FormatError);
    }
    std::filesystem::remove(path);
}
