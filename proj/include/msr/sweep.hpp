#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msr/model.hpp"

namespace msr {

/// Grid of synthetic recovery experiments. Cells are visited with ensemble
/// outermost, then d, k, m, l, n.
struct SweepConfig {
    std::vector<std::size_t> d{100};
    std::vector<std::size_t> k{10};
    std::vector<std::size_t> m{4};
    std::vector<std::size_t> l{2};
    std::vector<std::size_t> n{10000};
    std::vector<Ensemble> ensembles{Ensemble::Gaussian};
    std::size_t trials = 100;
    double eps = 0.2;
    double lambda0 = 1.0;
    std::uint64_t base_seed = 0;
    /// Success iff distance < multiplier * eps * k * l.
    double multiplier = 1.0;
    /// 0 disables boosting.
    std::size_t boost = 0;
    std::size_t restarts = 10;
    LabelMode labels = LabelMode::Uniform;

    void validate() const;
};

/// Flat key=value lines; '#' starts a comment. List keys (d, k, m, l, n,
/// ensemble) may repeat and may also hold comma-separated values.
SweepConfig parse_sweep_config(const std::string& text);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepRecord {
    std::size_t d = 0, k = 0, m = 0, l = 0, n = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    /// Mean match distance over trials that completed.
    double mean_distance = 0.0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    std::size_t threads = 1;
    /// Record wall-clock time per cell. Off by default so output is reproducible.
    bool timing = false;
};

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t cell, std::size_t trial);

/// One end-to-end trial: generate, recover (optionally boosted), match.
/// Returns the match distance against the generated truth.
std::size_t run_trial(const ModelParams& params, std::size_t n, std::uint64_t seed, const SweepConfig& config);

std::vector<SweepRecord> run_sweep(const SweepConfig& config, const SweepOptions& options = {});

inline constexpr const char* kSweepCsvHeader =
    "d,k,m,l,n,trials,successes,success_rate,mean_distance,wall_ms,seed";

/// Header plus one row per record, floats with 6 significant digits.
std::string format_csv(const std::vector<SweepRecord>& records);

}  // namespace msr
