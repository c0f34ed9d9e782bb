#include "msr/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "msr/boosting.hpp"
#include "msr/estimator.hpp"

namespace msr {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& value)
{
    std::vector<std::string> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& value)
{
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != value.size() || value.front() == '-')
        throw std::invalid_argument("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& key, const std::string& value)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != value.size()) throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value + "'");
    return v;
}

struct Cell {
    ModelParams params;
    std::size_t n = 0;
};

std::vector<Cell> grid_cells(const SweepConfig& c)
{
    std::vector<Cell> cells;
    for (auto ens : c.ensembles)
        for (auto d : c.d)
            for (auto k : c.k)
                for (auto m : c.m)
                    for (auto l : c.l)
                        for (auto n : c.n) {
                            Cell cell;
                            cell.params.d = d;
                            cell.params.k = k;
                            cell.params.m = m;
                            cell.params.l = l;
                            cell.params.lambda0 = c.lambda0;
                            cell.params.sample_dist = ens;
                            cell.params.matrix_dist = ens;
                            cell.n = n;
                            cells.push_back(cell);
                        }
    return cells;
}

std::string fmt6(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

void SweepConfig::validate() const
{
    auto positive = [](const std::vector<std::size_t>& values, const char* name) {
        if (values.empty()) throw std::invalid_argument(std::string("sweep grid '") + name + "' is empty");
        for (auto v : values)
            if (v == 0) throw std::invalid_argument(std::string("sweep grid '") + name + "' has a zero entry");
    };
    positive(d, "d");
    positive(k, "k");
    positive(m, "m");
    positive(l, "l");
    positive(n, "n");
    if (ensembles.empty()) throw std::invalid_argument("sweep needs at least one ensemble");
    if (trials == 0) throw std::invalid_argument("sweep trials must be at least 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("sweep eps must lie in (0, 1]");
    if (!(lambda0 > 0.0)) throw std::invalid_argument("sweep lambda0 must be positive");
    if (!(multiplier > 0.0)) throw std::invalid_argument("sweep multiplier must be positive");
    for (auto dd : d)
        for (auto kk : k)
            for (auto ll : l)
                if (kk * ll > dd)
                    throw std::invalid_argument("sweep grid has k*l > d (k=" + std::to_string(kk) +
                                                ", l=" + std::to_string(ll) + ", d=" + std::to_string(dd) + ")");
}

SweepConfig parse_sweep_config(const std::string& text)
{
    SweepConfig c;
    std::vector<std::size_t> d, k, m, l, n;
    std::vector<Ensemble> ens;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty value");

        auto append = [&](std::vector<std::size_t>& list) {
            for (const auto& item : split_commas(value)) list.push_back(parse_count(key, item));
        };
        if (key == "d") append(d);
        else if (key == "k") append(k);
        else if (key == "m") append(m);
        else if (key == "l") append(l);
        else if (key == "n") append(n);
        else if (key == "ensemble")
            for (const auto& item : split_commas(value)) ens.push_back(parse_ensemble(item));
        else if (key == "trials") c.trials = parse_count(key, value);
        else if (key == "eps") c.eps = parse_real(key, value);
        else if (key == "lambda0") c.lambda0 = parse_real(key, value);
        else if (key == "seed") c.base_seed = parse_count(key, value);
        else if (key == "multiplier") c.multiplier = parse_real(key, value);
        else if (key == "boost") c.boost = parse_count(key, value);
        else if (key == "restarts") c.restarts = parse_count(key, value);
        else if (key == "labels") {
            if (value == "uniform") c.labels = LabelMode::Uniform;
            else if (value == "stratified") c.labels = LabelMode::Stratified;
            else throw std::invalid_argument("config key 'labels': expected uniform or stratified");
        } else
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!d.empty()) c.d = d;
    if (!k.empty()) c.k = k;
    if (!m.empty()) c.m = m;
    if (!l.empty()) c.l = l;
    if (!n.empty()) c.n = n;
    if (!ens.empty()) c.ensembles = ens;
    c.validate();
    return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_sweep_config(buf.str());
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t cell, std::size_t trial)
{
    return hash_combine(hash_combine(base_seed, cell), trial);
}

std::size_t run_trial(const ModelParams& params, std::size_t n, std::uint64_t seed, const SweepConfig& config)
{
    BatchOptions batch_options;
    batch_options.labels = config.labels;
    const SimulatedBatch batch = simulate_proxies(params, n, seed, batch_options);
    RecoveryOptions options;
    options.restarts = config.restarts;
    options.seed = hash_combine(seed, 0x6b6d65616e73ULL);
    SupportTuple estimate;
    if (config.boost > 0)
        estimate = boosted_recover(batch.proxies, config.boost, params.k, params.l, config.eps, options).estimate;
    else
        estimate = recover(batch.proxies, params.k, params.l, options).supports_est;
    return match_distance(batch.truth, estimate).distance;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config, const SweepOptions& options)
{
    config.validate();
    const std::vector<Cell> cells = grid_cells(config);
    const std::size_t trials = config.trials;
    const std::size_t jobs = cells.size() * trials;

    // distance per job; max() marks a failed trial
    constexpr std::size_t kFailed = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> distances(jobs, kFailed);
    std::vector<double> elapsed(jobs, 0.0);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const std::size_t cell = job / trials;
            const std::size_t trial = job % trials;
            const auto start = std::chrono::steady_clock::now();
            try {
                distances[job] = run_trial(cells[cell].params, cells[cell].n,
                                           trial_seed(config.base_seed, cell, trial), config);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "sweep: cell " << cell << " trial " << trial << " failed: " << e.what() << '\n';
            }
            elapsed[job] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, jobs));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<SweepRecord> records;
    records.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& p = cells[c].params;
        SweepRecord r;
        r.d = p.d;
        r.k = p.k;
        r.m = p.m;
        r.l = p.l;
        r.n = cells[c].n;
        r.trials = trials;
        r.seed = config.base_seed;
        const double threshold = config.multiplier * config.eps * static_cast<double>(p.k * p.l);
        double total = 0.0;
        std::size_t completed = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const std::size_t dist = distances[c * trials + t];
            if (options.timing) r.wall_ms += elapsed[c * trials + t];
            if (dist == kFailed) continue;
            ++completed;
            total += static_cast<double>(dist);
            if (static_cast<double>(dist) < threshold) ++r.successes;
        }
        r.success_rate = static_cast<double>(r.successes) / static_cast<double>(trials);
        r.mean_distance = completed > 0 ? total / static_cast<double>(completed) : std::nan("");
        records.push_back(r);
    }
    return records;
}

std::string format_csv(const std::vector<SweepRecord>& records)
{
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.d) + ',' + std::to_string(r.k) + ',' + std::to_string(r.m) + ',' +
               std::to_string(r.l) + ',' + std::to_string(r.n) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.successes) + ',' + fmt6(r.success_rate) + ',' + fmt6(r.mean_distance) + ',' +
               fmt6(r.wall_ms) + ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

}  // namespace msr
