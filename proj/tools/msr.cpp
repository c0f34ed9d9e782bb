// Command-line front end for the msr library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "msr/boosting.hpp"
#include "msr/dataset_io.hpp"
#include "msr/digits.hpp"
#include "msr/estimator.hpp"
#include "msr/idx.hpp"
#include "msr/sweep.hpp"
#include "msr/theory.hpp"

namespace {

std::string fmt(const char* pattern, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

std::string g10(double x) { return fmt("%.10g", x); }

struct ModelFlags {
    std::size_t d = 100, k = 10, l = 2, m = 4, n = 10000;
    double lambda0 = 1.0;
    std::string ensemble = "gaussian";
    std::uint64_t seed = 0;
    bool stratified = false;

    void add(CLI::App* app, bool with_d = true, bool with_n = true)
    {
        if (with_d) app->add_option("--d", d, "ambient dimension")->capture_default_str();
        app->add_option("--k", k, "support size")->capture_default_str();
        app->add_option("--l", l, "number of supports")->capture_default_str();
        app->add_option("--m", m, "measurements per sample")->capture_default_str();
        if (with_n) app->add_option("--n", n, "number of samples")->capture_default_str();
        app->add_option("--lambda0", lambda0, "on-support variance")->capture_default_str();
        app->add_option("--ensemble", ensemble, "gaussian or rademacher (samples and matrices)")->capture_default_str();
        app->add_option("--seed", seed, "base seed")->capture_default_str();
    }

    msr::ModelParams params() const
    {
        msr::ModelParams p;
        p.d = d;
        p.k = k;
        p.l = l;
        p.m = m;
        p.lambda0 = lambda0;
        p.sample_dist = p.matrix_dist = msr::parse_ensemble(ensemble);
        p.validate();
        return p;
    }
};

void write_text(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string support_lines(const msr::SupportTuple& tuple)
{
    std::string out;
    for (const auto& part : tuple.parts) {
        for (std::size_t i = 0; i < part.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(part[i]);
        }
        out += '\n';
    }
    return out;
}

std::string support_line(const msr::Support& part)
{
    msr::SupportTuple t;
    t.parts.push_back(part);
    return support_lines(t);
}

std::string theory_report(const msr::ModelParams& p, double eps, double delta, std::size_t validate,
                          std::uint64_t seed)
{
    std::ostringstream out;
    const auto ens = msr::EnsembleMoments::of(p.matrix_dist);
    const auto g = msr::gamma_terms(p.k, p.m, ens);
    const auto spec = msr::expected_affinity(p);
    const auto spectrum = msr::block_spectrum(spec);
    out << "params d=" << p.d << " k=" << p.k << " l=" << p.l << " m=" << p.m << " lambda0=" << g10(p.lambda0)
        << " ensemble=" << msr::to_string(p.matrix_dist) << " rho=" << g10(p.rho()) << '\n';
    out << "gamma1 s=" << g10(g.g1s) << " sd=" << g10(g.g1sd) << " d=" << g10(g.g1d) << '\n';
    out << "gamma2 s=" << g10(g.g2s) << " sd=" << g10(g.g2sd) << " d=" << g10(g.g2d) << '\n';
    out << "gamma3 s=" << g10(g.g3s) << " sd=" << g10(g.g3sd) << " d=" << g10(g.g3d) << '\n';
    out << "mu_on " << g10(spec.mu_on) << '\n';
    out << "mu_off " << g10(spec.mu_off) << '\n';
    out << "mu0 " << g10(spec.mu0) << '\n';
    out << "mu0_bound " << g10(spec.mu0_bound) << '\n';
    out << "nu1 " << g10(spectrum.nu1) << '\n';
    out << "nu_mid " << g10(spectrum.nu_mid) << " x" << (p.l - 1) << '\n';
    out << "nu_low " << g10(spectrum.nu_low) << " x" << p.l * (p.k - 1) << '\n';
    out << "gap " << g10(spectrum.gap) << " floor " << g10(p.lambda0 * p.lambda0 * p.k / static_cast<double>(p.l))
        << '\n';
    out << "opnorm_bound " << g10(msr::operator_norm_bound(p)) << '\n';
    const auto sc = msr::sample_complexity_bounds(p, eps, delta);
    out << "n_union " << g10(sc.n_union) << '\n';
    out << "n_cluster " << g10(sc.n_cluster) << " eps_used " << g10(sc.eps_used) << '\n';
    out << "n_total " << g10(sc.n_total) << '\n';
    if (validate > 0) {
        const auto mc = msr::monte_carlo_affinity(p, validate, seed);
        out << "mc n=" << validate << " seed=" << seed << '\n';
        out << "mc mu_on " << g10(mc.mu_on.value) << " se " << g10(mc.mu_on.se) << '\n';
        out << "mc mu_off " << g10(mc.mu_off.value) << " se " << g10(mc.mu_off.se) << '\n';
        out << "mc mu0 " << g10(mc.mu0.value) << " se " << g10(mc.mu0.se) << '\n';
    }
    return out.str();
}

std::pair<int, int> parse_digits(const std::string& s)
{
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--digits expects a,b");
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiple support recovery from compressed samples"};
    app.require_subcommand(1);

    // recover
    auto* rec = app.add_subcommand("recover", "recover supports from a dataset");
    ModelFlags rec_model;
    std::string rec_input, rec_out, rec_union = "known";
    bool rec_synthetic = false, rec_verbose = false;
    std::size_t rec_restarts = 10, rec_boost = 0;
    double rec_eps = 0.2;
    std::optional<double> rec_tau;
    auto* in_opt = rec->add_option("--input", rec_input, "MSR1 dataset file");
    auto* syn_opt = rec->add_flag("--synthetic", rec_synthetic, "generate a synthetic dataset from the model flags");
    in_opt->excludes(syn_opt);
    rec_model.add(rec);
    rec->add_flag("--stratified", rec_model.stratified, "equal samples per support (synthetic)");
    rec->add_option("--union-size", rec_union, "auto, or the union size (default k*l)");
    rec->add_option("--restarts", rec_restarts, "l-means restarts")->capture_default_str();
    rec->add_option("--tau", rec_tau, "overlap threshold; enables two-support overlap mode");
    rec->add_option("--boost", rec_boost, "number of boosting blocks L");
    rec->add_option("--eps", rec_eps, "boosting tolerance")->capture_default_str();
    rec->add_option("--out", rec_out, "report path (default stdout)");
    rec->add_flag("--verbose", rec_verbose, "diagnostics on stderr");

    // theory
    auto* th = app.add_subcommand("theory", "closed-form block structure, spectrum and sample complexity");
    ModelFlags th_model;
    double th_eps = 0.2, th_delta = 0.1;
    std::size_t th_validate = 0;
    th_model.add(th, true, false);
    th->add_option("--eps", th_eps)->capture_default_str();
    th->add_option("--delta", th_delta)->capture_default_str();
    th->add_option("--validate", th_validate, "append a Monte Carlo check with this many samples");

    // sweep
    auto* sw = app.add_subcommand("sweep", "run a recovery sweep and write CSV");
    std::string sw_config, sw_out;
    std::size_t sw_threads = 1;
    bool sw_timing = false;
    sw->add_option("--config", sw_config, "key=value config file")->required();
    sw->add_option("--out", sw_out, "CSV path (default stdout)");
    sw->add_option("--threads", sw_threads)->capture_default_str();
    sw->add_flag("--timing", sw_timing, "fill wall_ms (output is then not reproducible)");

    // mnist
    auto* mn = app.add_subcommand("mnist", "two-digit support recovery from IDX files");
    std::string mn_images, mn_labels, mn_digits = "1,5", mn_out;
    msr::DigitsOptions mn_opts;
    mn->add_option("--images", mn_images)->required();
    mn->add_option("--labels", mn_labels)->required();
    mn->add_option("--digits", mn_digits)->capture_default_str();
    mn->add_option("--m", mn_opts.m)->capture_default_str();
    mn->add_option("--n", mn_opts.n)->capture_default_str();
    mn->add_option("--seed", mn_opts.seed)->capture_default_str();
    mn->add_option("--out-dir", mn_out, "directory for PGM masks")->required();

    // montecarlo-et
    auto* mc = app.add_subcommand("montecarlo-et", "Monte Carlo estimate of E[T] against the closed forms");
    ModelFlags mc_model;
    mc_model.n = 200000;
    mc_model.add(mc, false, true);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic MSR1 dataset");
    ModelFlags gen_model;
    std::string gen_out;
    gen_model.add(gen);
    gen->add_flag("--stratified", gen_model.stratified);
    gen->add_option("--out", gen_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (rec->parsed()) {
            if (rec_input.empty() && !rec_synthetic) throw std::invalid_argument("recover needs --input or --synthetic");
            msr::ProxyBatch batch;
            std::size_t k = rec_model.k, l = rec_model.l;
            std::optional<msr::SupportTuple> truth;
            if (rec_synthetic) {
                const auto p = rec_model.params();
                msr::BatchOptions bo;
                bo.labels = rec_model.stratified ? msr::LabelMode::Stratified : msr::LabelMode::Uniform;
                auto sim = msr::simulate_proxies(p, rec_model.n, rec_model.seed, bo);
                batch = std::move(sim.proxies);
                truth = sim.truth;
            } else {
                const auto ds = msr::read_msr1(rec_input);
                k = ds.params.k;
                l = ds.params.l;
                truth = ds.truth;
                batch = msr::make_proxy_batch(ds);
            }
            msr::RecoveryOptions opts;
            opts.restarts = rec_restarts;
            opts.seed = rec_model.seed;
            if (rec_union == "auto") opts.estimate_union = true;
            else if (rec_union != "known") opts.union_size = std::stoul(rec_union);

            std::string report;
            if (rec_tau) {
                if (l != 2) throw std::invalid_argument("overlap mode (--tau) needs l = 2");
                const auto res = msr::recover_overlapping_two(batch, k, *rec_tau, opts);
                report = support_line(res.first) + support_line(res.second);
            } else if (rec_boost > 0) {
                const auto res = msr::boosted_recover(batch, rec_boost, k, l, rec_eps, opts);
                report = support_lines(res.estimate);
                if (rec_verbose)
                    std::cerr << "boost chosen_block=" << res.chosen_block << " robust=" << res.robust << '\n';
                if (rec_verbose && truth)
                    std::cerr << "distance " << msr::match_distance(*truth, res.estimate).distance << '\n';
            } else {
                const auto res = msr::recover(batch, k, l, opts);
                report = support_lines(res.supports_est);
                if (rec_verbose) {
                    std::cerr << "union_size " << res.diagnostics.union_size << " objective "
                              << g10(res.diagnostics.kmeans_objective) << " nonempty "
                              << res.diagnostics.nonempty_groups << '\n';
                    if (truth) std::cerr << "distance " << msr::match_distance(*truth, res.supports_est).distance << '\n';
                }
            }
            write_text(report, rec_out);
        } else if (th->parsed()) {
            std::cout << theory_report(th_model.params(), th_eps, th_delta, th_validate, th_model.seed);
        } else if (sw->parsed()) {
            const auto config = msr::load_sweep_config(sw_config);
            msr::SweepOptions so;
            so.threads = sw_threads;
            so.timing = sw_timing;
            write_text(msr::format_csv(msr::run_sweep(config, so)), sw_out);
        } else if (mn->parsed()) {
            mn_opts.digits = parse_digits(mn_digits);
            mn_opts.out_dir = mn_out;
            const auto images = msr::parse_idx_images(mn_images);
            const auto labels = msr::parse_idx_labels(mn_labels);
            const auto res = msr::run_digits(images, labels, mn_opts);
            std::cout << "samples " << res.samples_per_digit[0] << ' ' << res.samples_per_digit[1] << '\n';
            std::cout << "union_size " << res.union_est.size() << " intersection_size " << res.intersection_est.size()
                      << '\n';
            std::cout << "support_sizes " << res.estimate.parts[0].size() << ' ' << res.estimate.parts[1].size() << '\n';
            std::cout << "distance_to_reference " << res.distance_to_reference << '\n';
        } else if (mc->parsed()) {
            msr::ModelParams p = mc_model.params();
            const auto spec = msr::expected_affinity(p);
            const auto est = msr::monte_carlo_affinity(p, mc_model.n, mc_model.seed);
            auto row = [](const char* name, double closed, const msr::BlockEstimate& e) {
                const double z = e.se > 0.0 ? (e.value - closed) / e.se : 0.0;
                std::cout << name << " closed " << g10(closed) << " mc " << g10(e.value) << " se " << g10(e.se)
                          << " z " << fmt("%.3f", z) << '\n';
            };
            std::cout << "n " << mc_model.n << " seed " << mc_model.seed << '\n';
            row("mu_on", spec.mu_on, est.mu_on);
            row("mu_off", spec.mu_off, est.mu_off);
            row("mu0", spec.mu0, est.mu0);
            std::cout << "mu0_bound " << g10(spec.mu0_bound) << '\n';
        } else if (gen->parsed()) {
            msr::BatchOptions bo;
            bo.labels = gen_model.stratified ? msr::LabelMode::Stratified : msr::LabelMode::Uniform;
            msr::write_msr1(msr::generate_batch(gen_model.params(), gen_model.n, gen_model.seed, bo), gen_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
