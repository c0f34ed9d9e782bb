#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "msr/boosting.hpp"
#include "msr/digits.hpp"
#include "msr/idx.hpp"
#include "msr/sweep.hpp"

using namespace msr;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("msr_test_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(MSR_CLI_PATH) + " " + args;
    return std::system(cmd.c_str());
}

IdxError::Kind idx_error_kind(const std::vector<std::uint8_t>& data, bool images)
{
    try {
        if (images) parse_idx_images(data);
        else parse_idx_labels(data);
    } catch (const IdxError& e) {
        return e.kind();
    }
    FAIL("no IdxError thrown");
    return IdxError::Kind::Io;
}

// three classes on a 10x10 grid: rows 0-1 for digit 1, rows 3-4 for digit 5,
// the first four pixels of row 2 shared by both, rows 6+ for an unused digit 7
void synthetic_digits(std::size_t count, IdxImages& images, IdxLabels& labels)
{
    images.count = count;
    images.rows = images.cols = 10;
    images.bytes.assign(count * 100, 0);
    labels.labels.clear();
    Rng rng(5);
    for (std::size_t i = 0; i < count; ++i) {
        const int digit = i % 3 == 2 ? 7 : (rng.uniform() < 0.5 ? 1 : 5);
        labels.labels.push_back(static_cast<std::uint8_t>(digit));
        for (std::size_t p = 0; p < 100; ++p) {
            const std::size_t r = p / 10;
            const bool on = (digit == 1 && r < 2) || (digit == 5 && (r == 3 || r == 4)) || (digit == 7 && r >= 6) ||
                            (digit != 7 && r == 2 && p % 10 < 4);
            if (on) images.bytes[i * 100 + p] = static_cast<std::uint8_t>(128 + rng.below(128));
        }
    }
}

Support rows_mask(std::size_t first, std::size_t last, std::size_t extra_row, std::size_t extra_cols)
{
    Support s;
    for (std::size_t p = 0; p < 100; ++p) {
        const std::size_t r = p / 10;
        if ((r >= first && r <= last) || (r == extra_row && p % 10 < extra_cols)) s.push_back(p);
    }
    return s;
}

}  // namespace

TEST_CASE("sweep config parsing")
{
    const auto c = parse_sweep_config(
        "# comment line\n"
        "d = 100\n"
        "k = 10, 15\n"
        "k = 20   # trailing comment\n"
        "m=4\n"
        "n=1000,2000\n"
        "ensemble=gaussian,rademacher\n"
        "trials=7\n"
        "eps=0.25\n"
        "seed=99\n"
        "multiplier=2\n"
        "boost=3\n"
        "restarts=4\n"
        "labels=stratified\n");
    CHECK(c.d == std::vector<std::size_t>{100});
    CHECK(c.k == std::vector<std::size_t>{10, 15, 20});
    CHECK(c.m == std::vector<std::size_t>{4});
    CHECK(c.n == std::vector<std::size_t>{1000, 2000});
    CHECK(c.ensembles == std::vector<Ensemble>{Ensemble::Gaussian, Ensemble::Rademacher});
    CHECK(c.trials == 7);
    CHECK(c.eps == 0.25);
    CHECK(c.base_seed == 99);
    CHECK(c.multiplier == 2.0);
    CHECK(c.boost == 3);
    CHECK(c.restarts == 4);
    CHECK(c.labels == LabelMode::Stratified);

    const auto defaults = parse_sweep_config("");
    CHECK(defaults.d == std::vector<std::size_t>{100});
    CHECK(defaults.trials == 100);
    CHECK(defaults.eps == 0.2);

    CHECK_THROWS_AS(parse_sweep_config("colour=blue\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("d\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("trials=0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("eps=1.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("k=-3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("d=10\nk=6\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("ensemble=cauchy\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_config("labels=sorted\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_sweep_config("/nonexistent/sweep.cfg"), std::runtime_error);
}

TEST_CASE("trial seeds")
{
    CHECK(trial_seed(1, 0, 0) == trial_seed(1, 0, 0));
    CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
    CHECK(trial_seed(1, 2, 3) != trial_seed(2, 2, 3));
}

TEST_CASE("run_sweep")
{
    SUBCASE("single exact trial")
    {
        const auto c = parse_sweep_config("d=40\nk=4\nm=4\nl=2\nn=20000\ntrials=1\n");
        const auto rows = run_sweep(c);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].successes == 1);
        CHECK(rows[0].success_rate == 1.0);
        CHECK(rows[0].mean_distance == 0.0);
        CHECK(rows[0].wall_ms == 0.0);
    }
    SUBCASE("grid order, bounds and thread independence")
    {
        const auto c = parse_sweep_config("d=30\nk=3,5\nm=2\nl=2\nn=300,3000\ntrials=6\nseed=4\nensemble=gaussian,rademacher\n");
        const auto one = run_sweep(c, {1, false});
        const auto four = run_sweep(c, {4, false});
        CHECK(format_csv(one) == format_csv(four));
        REQUIRE(one.size() == 8);
        const std::size_t expect_k[] = {3, 3, 5, 5, 3, 3, 5, 5};
        const std::size_t expect_n[] = {300, 3000, 300, 3000, 300, 3000, 300, 3000};
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(one[i].k == expect_k[i]);
            CHECK(one[i].n == expect_n[i]);
            CHECK(one[i].trials == 6);
            CHECK(one[i].successes <= one[i].trials);
            CHECK(one[i].success_rate == static_cast<double>(one[i].successes) / 6.0);
            CHECK(one[i].seed == 4);
        }
    }
    SUBCASE("success rule counts against multiplier * eps * k * l")
    {
        auto c = parse_sweep_config("d=30\nk=5\nm=2\nl=2\nn=200\ntrials=5\nseed=8\n");
        const auto strict = run_sweep(c)[0];
        std::size_t expected = 0;
        for (std::size_t t = 0; t < c.trials; ++t) {
            ModelParams p;
            p.d = 30;
            p.k = 5;
            p.l = 2;
            p.m = 2;
            expected += run_trial(p, 200, trial_seed(8, 0, t), c) < 0.2 * 5 * 2 ? 1 : 0;
        }
        CHECK(strict.successes == expected);
        c.multiplier = 10.5;  // threshold 21 exceeds the largest possible distance 2kl
        CHECK(run_sweep(c)[0].successes == c.trials);
    }
    SUBCASE("timing fills wall_ms")
    {
        const auto c = parse_sweep_config("d=20\nk=2\nm=2\nl=2\nn=2000\ntrials=2\n");
        CHECK(run_sweep(c, {1, true})[0].wall_ms > 0.0);
    }
}

TEST_CASE("format_csv")
{
    SweepRecord r;
    r.d = 100;
    r.k = 10;
    r.m = 4;
    r.l = 2;
    r.n = 5000;
    r.trials = 3;
    r.successes = 1;
    r.success_rate = 1.0 / 3.0;
    r.mean_distance = 2.5;
    r.seed = 7;
    CHECK(format_csv({r}) == std::string(kSweepCsvHeader) + "\n100,10,4,2,5000,3,1,0.333333,2.5,0,7\n");
    CHECK(std::string(kSweepCsvHeader) == "d,k,m,l,n,trials,successes,success_rate,mean_distance,wall_ms,seed");
}

TEST_CASE("IDX parsing")
{
    const fs::path fixtures = MSR_FIXTURE_DIR;
    SUBCASE("hand-built image fixture")
    {
        const auto im = parse_idx_images(fixtures / "one_image_2x2.idx");
        CHECK(im.count == 1);
        CHECK(im.rows == 2);
        CHECK(im.cols == 2);
        CHECK(im.image(0) == std::vector<double>{0.0, 1.0, 0.0, 1.0});
        CHECK(encode_idx(im) == read_bytes(fixtures / "one_image_2x2.idx"));
    }
    SUBCASE("hand-built label fixture")
    {
        const auto lb = parse_idx_labels(fixtures / "three_labels.idx");
        CHECK(lb.labels == std::vector<std::uint8_t>{1, 5, 1});
        CHECK(encode_idx(lb) == read_bytes(fixtures / "three_labels.idx"));
    }
    SUBCASE("round trip through files")
    {
        const auto dir = scratch_dir("idx");
        IdxImages im;
        IdxLabels lb;
        synthetic_digits(12, im, lb);
        write_idx(im, dir / "images.idx");
        write_idx(lb, dir / "labels.idx");
        const auto im2 = parse_idx_images(dir / "images.idx");
        CHECK(im2.bytes == im.bytes);
        CHECK(encode_idx(im2) == read_bytes(dir / "images.idx"));
        CHECK(parse_idx_labels(dir / "labels.idx").labels == lb.labels);
    }
    SUBCASE("errors")
    {
        auto images = read_bytes(fixtures / "one_image_2x2.idx");
        auto labels = read_bytes(fixtures / "three_labels.idx");
        CHECK(idx_error_kind(labels, true) == IdxError::Kind::BadMagic);
        CHECK(idx_error_kind(images, false) == IdxError::Kind::BadMagic);

        auto short_images = images;
        short_images.pop_back();
        CHECK(idx_error_kind(short_images, true) == IdxError::Kind::Truncated);
        CHECK(idx_error_kind({0, 0, 8}, true) == IdxError::Kind::Truncated);
        auto short_labels = labels;
        short_labels.pop_back();
        CHECK(idx_error_kind(short_labels, false) == IdxError::Kind::Truncated);

        auto huge = images;
        for (std::size_t i = 4; i < 16; ++i) huge[i] = 0xff;
        CHECK(idx_error_kind(huge, true) == IdxError::Kind::DimensionOverflow);

        try {
            parse_idx_images(fixtures / "missing.idx");
            FAIL("expected an IdxError");
        } catch (const IdxError& e) {
            CHECK(e.kind() == IdxError::Kind::Io);
        }
    }
}

TEST_CASE("PGM masks")
{
    const std::string header = "P5\n2 2\n255\n";
    auto body = [&](const std::vector<std::uint8_t>& pgm) {
        REQUIRE(pgm.size() == header.size() + 4);
        CHECK(std::string(pgm.begin(), pgm.begin() + static_cast<long>(header.size())) == header);
        return std::vector<std::uint8_t>(pgm.begin() + static_cast<long>(header.size()), pgm.end());
    };
    CHECK(body(encode_pgm({0}, 2, 2)) == std::vector<std::uint8_t>{255, 0, 0, 0});
    CHECK(body(encode_pgm({}, 2, 2)) == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(body(encode_pgm({0, 1, 2, 3}, 2, 2)) == std::vector<std::uint8_t>{255, 255, 255, 255});
    CHECK_THROWS_AS(encode_pgm({4}, 2, 2), std::invalid_argument);

    // width before height in the header
    const auto wide = encode_pgm({5}, 2, 3);
    CHECK(std::string(wide.begin(), wide.begin() + 11) == "P5\n3 2\n255\n");
    CHECK(wide[11 + 5] == 255);

    const auto dir = scratch_dir("pgm");
    emit_pgm({1, 2}, 2, 2, dir / "mask.pgm");
    CHECK(read_bytes(dir / "mask.pgm") == encode_pgm({1, 2}, 2, 2));
}

TEST_CASE("run_digits")
{
    IdxImages images;
    IdxLabels labels;
    synthetic_digits(6000, images, labels);
    const Support digit1 = rows_mask(0, 1, 2, 4);
    const Support digit5 = rows_mask(3, 4, 2, 4);

    SUBCASE("compressed pipeline recovers both masks")
    {
        const auto dir = scratch_dir("digits");
        DigitsOptions o;
        o.m = 10;
        o.n = 3000;
        o.seed = 3;
        o.out_dir = dir;
        const auto r = run_digits(images, labels, o);
        CHECK(r.rows == 10);
        CHECK(r.cols == 10);
        CHECK(r.samples_per_digit[0] + r.samples_per_digit[1] == 3000);
        CHECK(r.reference.parts[0] == digit1);
        CHECK(r.reference.parts[1] == digit5);
        CHECK(r.intersection_est == Support{20, 21, 22, 23});
        CHECK(r.union_est.size() == 44);
        CHECK(r.distance_to_reference == 0);
        CHECK(match_distance(r.estimate, SupportTuple{{digit1, digit5}}).distance == 0);
        for (const char* name : {"support_1.pgm", "support_2.pgm", "reference_1.pgm", "reference_2.pgm"})
            CHECK(fs::file_size(dir / name) == 13 + 100);  // "P5\n10 10\n255\n" header
        CHECK(read_bytes(dir / "reference_1.pgm") == encode_pgm(digit1, 10, 10));
    }
    SUBCASE("m = d sanity regime")
    {
        DigitsOptions o;
        o.m = 100;
        o.n = 1000;
        const auto r = run_digits(images, labels, o);
        CHECK(r.distance_to_reference == 0);
    }
    SUBCASE("errors")
    {
        DigitsOptions o;
        o.n = 100000;
        CHECK_THROWS_AS(run_digits(images, labels, o), std::invalid_argument);
        o.n = 100;
        o.digits = {1, 1};
        CHECK_THROWS_AS(run_digits(images, labels, o), std::invalid_argument);
        o.digits = {1, 5};
        IdxLabels short_labels = labels;
        short_labels.labels.pop_back();
        CHECK_THROWS_AS(run_digits(images, short_labels, o), std::invalid_argument);
    }
}

TEST_CASE("CLI determinism")
{
    const auto dir = scratch_dir("cli");
    {
        std::ofstream cfg(dir / "sweep.cfg");
        cfg << "d=30\nk=3\nm=2\nl=2\nn=500,2000\ntrials=4\nseed=12\n";
    }
    const std::string cfg = (dir / "sweep.cfg").string();
    REQUIRE(run_cli("sweep --config " + cfg + " --out " + (dir / "a.csv").string()) == 0);
    REQUIRE(run_cli("sweep --config " + cfg + " --threads 3 --out " + (dir / "b.csv").string()) == 0);
    const auto a = read_text(dir / "a.csv");
    CHECK(a == read_text(dir / "b.csv"));
    CHECK(a.rfind(kSweepCsvHeader, 0) == 0);
    CHECK(a == format_csv(run_sweep(load_sweep_config(cfg))));

    const std::string model = "--d 40 --k 4 --l 2 --m 3 --n 5000 --seed 6";
    REQUIRE(run_cli("recover --synthetic " + model + " --out " + (dir / "r1.txt").string()) == 0);
    REQUIRE(run_cli("recover --synthetic " + model + " --out " + (dir / "r2.txt").string()) == 0);
    REQUIRE(run_cli("generate " + model + " --out " + (dir / "data.msr").string()) == 0);
    REQUIRE(run_cli("recover --input " + (dir / "data.msr").string() + " --k 4 --l 2 --out " +
                    (dir / "r3.txt").string()) == 0);
    const auto r1 = read_text(dir / "r1.txt");
    CHECK(!r1.empty());
    CHECK(r1 == read_text(dir / "r2.txt"));
    CHECK(r1 == read_text(dir / "r3.txt"));

    CHECK(run_cli("sweep --config /nonexistent.cfg 2>/dev/null") != 0);
}
