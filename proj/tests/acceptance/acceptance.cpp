// One line per acceptance criterion; `--only N` runs a single one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "rwpm/homogeneous.hpp"
#include "rwpm/moments.hpp"
#include "rwpm/parallel.hpp"
#include "rwpm/quenched.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/runner.hpp"
#include "rwpm/stats.hpp"

using namespace rwpm;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Criterion
{
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const TransitionEngine& engine_srw(int d)
{
    static std::map<int, std::unique_ptr<TransitionEngine>> c;
    auto& p = c[d];
    if (!p)
        p = std::make_unique<TransitionEngine>(make_srw_kernel(d));
    return *p;
}

const TransitionEngine& engine_stable(double g)
{
    static std::map<double, std::unique_ptr<TransitionEngine>> c;
    auto& p = c[g];
    if (!p)
        p = std::make_unique<TransitionEngine>(make_stable_kernel(g));
    return *p;
}

QuenchedSolveSpec qspec(const TransitionEngine& e, double rho, double beta, double T, double delta)
{
    QuenchedSolveSpec s;
    s.rho = rho;
    s.beta = beta;
    s.T = T;
    s.delta = delta;
    s.engine = &e;
    return s;
}

//---------------------------------------------------------------------------//
Outcome c1()
{
    const auto& e = engine_srw(3);
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
    gsl_function f{[](double t, void*) {
                       double i0 = gsl_sf_bessel_I0_scaled(t / 3);
                       return i0 * i0 * i0;
                   },
                   nullptr};
    double g = 0, err = 0;
    gsl_integration_qagiu(&f, 0, 0, 1e-11, 2000, w, &g, &err);
    gsl_integration_workspace_free(w);
    double oracle = 1 / g;
    bool ok = std::abs(e.beta0() - oracle) < 1e-4 && std::abs(e.beta0() - 0.659463) < 1e-4;
    return {ok, fmt("beta0 %.8f, Watson oracle %.8f", e.beta0(), oracle)};
}

Outcome c2()
{
    struct Case
    {
        const TransitionEngine* e;
        const char* label;
        double want, tol;
    };
    std::vector<Case> cases{{&engine_srw(3), "SRW(3)", 2, 0.15},
                            {&engine_srw(5), "SRW(5)", 1, 0.1},
                            {&engine_stable(0.75), "gamma 0.75", 3, 0.3}};
    bool ok = true;
    std::string d;
    for (const auto& c : cases)
    {
        auto fit = critical_exponent_fit(*c.e, beta_grid_near_critical(*c.e, 1e-3, 1e-2, 10));
        ok = ok && std::abs(fit.nu - c.want) <= c.tol;
        d += fmt("%s nu %.4f (want %g); ", c.label, fit.nu, c.want);
    }
    return {ok, d.substr(0, d.size() - 2)};
}

Outcome c3()
{
    const auto& e = engine_stable(2.0 / 3);
    double t = 1e4;
    auto u = renewal_density(e, e.beta0(), t, 0.01);
    double s = u.back() * t * t * e.K(t), want = 1 / (2 * kPi);
    return {std::abs(s / want - 1) <= 0.05,
            fmt("u t^2 K = %.6f vs 1/(2 pi) = %.6f, rel %.2e", s, want, s / want - 1)};
}

Outcome c4()
{
    bool ok = true;
    std::string d;
    for (auto* e : {&engine_stable(2.0 / 3), &engine_stable(0.8), &engine_srw(3)})
    {
        double r = e->k_prime_ratio(1e5), want = -(1 + e->alpha());
        ok = ok && std::abs(r / want - 1) <= 0.03;
        d += fmt("alpha %.4f: %.4f vs %.4f; ", e->alpha(), r, want);
    }
    return {ok, d.substr(0, d.size() - 2)};
}

Outcome c5()
{
    const auto& e = engine_stable(0.8);
    std::vector<double> res;
    for (double t : {1e2, 1e3, 1e4})
    {
        auto ymax = std::int64_t(std::floor(3 / e.K(t)));
        std::vector<Site> ys;
        for (int i = 0; i < 200; ++i)
            ys.push_back(Site::axis(1, std::llround(double(ymax) * i / 199.0)));
        res.push_back(e.llt_residual(t, ys));
    }
    bool ok = res[1] < res[0] && res[2] < res[1] && res[2] < 0.1;
    return {ok, fmt("residuals %.3e, %.3e, %.3e", res[0], res[1], res[2])};
}

Outcome c6()
{
    double worst_mass = 0, worst_fp = 0;
    for (auto* e : {&engine_srw(3), &engine_stable(0.8)})
        for (int i = 1; i <= 10; ++i)
        {
            double beta = e->beta0() * (1 + 0.1 * i);
            FreeEnergyTable tab(*e, beta);
            worst_mass = std::max(worst_mass, std::abs(tab.mass_time_domain() - 1));
            double h = 1e-5 * beta;
            double num = (solve_free_energy(*e, beta + h) - solve_free_energy(*e, beta - h)) / (2 * h);
            worst_fp = std::max(worst_fp, std::abs(tab.F_prime() / num - 1));
        }
    return {worst_mass < 1e-6 && worst_fp < 1e-3,
            fmt("max |int K_beta - 1| %.2e, max F' rel err %.2e", worst_mass, worst_fp)};
}

Outcome c7()
{
    const auto& e = engine_srw(3);
    double beta = 1.5 * e.beta0(), T = 5, delta = 0.01;
    double z = free_annealed_partition(e, beta, T, delta).back();
    auto q = quenched_partition_samples(qspec(e, 0.3, beta, T, delta), 10000, 7, default_workers());
    std::vector<double> zs;
    for (const auto& r : q)
        zs.push_back(std::exp(r.log_z));
    auto me = mean_stderr(zs);
    Rng rng(1);
    auto flat = constrained_quenched_partition(qspec(e, 0, beta, T, delta), e.simulate_path(0, T, rng));
    double zc = constrained_annealed_direct(e, beta, T, delta).back();
    double z0 = std::exp(flat.log_z);
    bool ok = std::abs(me.mean - z) <= 3 * me.std_err && std::abs(flat.log_zc - std::log(zc)) < 1e-8 &&
              std::abs(z0 / z - 1) < 1e-3;
    return {ok, fmt("E Z = %.5f +- %.5f vs z = %.5f (%.2f sigma); rho 0: Z/z = %.6f", me.mean,
                    me.std_err, z, (me.mean - z) / me.std_err, z0 / z)};
}

Outcome c8()
{
    const auto& e = engine_stable(0.8);
    std::vector<double> tg{1, 10, 100};
    std::map<double, std::vector<double>> logw;
    bool ok = true;
    double worst_sigma = 0;
    for (double rho : {0.1, 0.05})
    {
        auto r = log_w_expectation(qspec(e, rho, e.beta0(), 100, 0.01), tg, 30000, 11, default_workers());
        for (std::size_t k = 0; k < tg.size(); ++k)
        {
            std::vector<double> w;
            for (double v : r[k].values)
                w.push_back(std::exp(v));
            auto me = mean_stderr(w);
            double sig = std::abs(me.mean - 1) / me.std_err;
            worst_sigma = std::max(worst_sigma, sig);
            ok = ok && sig <= 3;
            logw[rho].push_back(r[k].mean / rho);
        }
    }
    double worst_shift = 0, lowest = 0;
    for (std::size_t k = 0; k < tg.size(); ++k)
    {
        worst_shift = std::max(worst_shift, std::abs(logw[0.05][k] / logw[0.1][k] - 1));
        lowest = std::min({lowest, logw[0.05][k], logw[0.1][k]});
    }
    ok = ok && worst_shift <= 0.2 && lowest > -10;
    return {ok, fmt("E w within %.2f sigma of 1; E log w / rho >= %.3f; rho -> rho/2 shift %.1f%%",
                    worst_sigma, lowest, 100 * worst_shift)};
}

Outcome c9()
{
    const auto& e = engine_stable(0.8);
    double beta = 1.2 * e.beta0(), T = 20;
    // same seeds at both rho: common random numbers
    auto a = quenched_partition_samples(qspec(e, 0.1, beta, T, 0.05), 1000, 5, default_workers());
    auto b = quenched_partition_samples(qspec(e, 0.3, beta, T, 0.05), 1000, 5, default_workers());
    std::vector<double> d, fa, fb;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        fa.push_back(a[i].log_zc / T);
        fb.push_back(b[i].log_zc / T);
        d.push_back(fa.back() - fb.back());
    }
    auto md = mean_stderr(d);
    return {md.mean >= -3 * md.std_err,
            fmt("F(0.1) %.5f, F(0.3) %.5f, paired diff %.5f +- %.5f", mean_stderr(fa).mean,
                mean_stderr(fb).mean, md.mean, md.std_err)};
}

Outcome c10()
{
    bool ok = true;
    std::string d;
    {
        auto s = overlap_stats({0, 1, 3}, {0, 2, 5}, 0, 5);
        ok = ok && s.j1 == 1 && s.j2 == 1 && s.frak_j == 1 && s.frak_j_prime == 1;
        auto tr = iterated_overshoots({2, 7, 20}, {1, 4, 9, 30}, 10, 0, 0);
        ok = ok && tr.T == std::vector<double>{1, 2, 4, 7, 9, 20} &&
             tr.S == std::vector<double>{1, 2, 3, 2, 11} && tr.D == 4;
    }
    d += ok ? "fixtures ok; " : "fixtures FAIL; ";
    Rng rng(99);
    int bad = 0;
    auto pts = [&](int n) {
        std::vector<double> v(n);
        for (auto& x : v)
            x = 40 * rng.uniform();
        std::sort(v.begin(), v.end());
        return v;
    };
    for (int rep = 0; rep < 20; ++rep)
    {
        auto t = pts(3 + int(rng.below(12))), tp = pts(3 + int(rng.below(12)));
        auto s = overlap_stats(t, tp, 2, 38, {}, true);
        auto w = oracle::overlap(t, tp, 2, 38, 1);
        bad += s.j1 != w.j1 || s.j2 != w.j2 || s.frak_j != w.fj || s.frak_j_prime != w.fjp;
        auto tr = iterated_overshoots(t, tp, 8, 0, 0);
        bad += tr.T != oracle::overshoots(t, tp, 8);
    }
    d += fmt("%d brute-force mismatches; ", bad);
    const auto& e = engine_stable(0.8);
    FreeEnergyTable tab(e, 1.2 * e.beta0());
    MomentExperiment ex;
    ex.table = &tab;
    ex.A = 2;
    ex.n_pairs = 10000;
    ex.seed = 10;
    ex.workers = default_workers();
    ex.h_list = dyadic_h_list(ex.T());
    auto pairs = sample_pairs(ex, true);
    long viol = 0, trunc = 0;
    for (const auto& p : pairs)
    {
        viol += p.j1 + p.j2 != p.count_to_T || p.count_to_T > p.D;
        trunc += p.truncated;
    }
    d += fmt("identity violations %ld / %zu pairs, truncated %ld", viol, pairs.size(), trunc);
    return {ok && bad == 0 && viol == 0 && trunc == 0, d};
}

Outcome c11()
{
    bool ok = true;
    std::string d;
    {
        const auto& e = engine_stable(0.6);
        FreeEnergyTable tab(e, 1.02 * e.beta0());
        MomentExperiment ex;
        ex.table = &tab;
        ex.A = 2;
        ex.n_pairs = 20000;
        ex.seed = 5;
        ex.workers = default_workers();
        ex.h_list = dyadic_h_list(ex.T());
        auto pairs = sample_pairs(ex);
        double lo = 1e300, hi = 0;
        d += fmt("gamma 0.6, T %.0f: rate/(H/T)^{2a-1} =", ex.T());
        for (double H : {8.0, 32.0, 128.0})
        {
            auto nt = nh_tail(ex, pairs, H);
            double r = nt.rate / nt.reference;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            d += fmt(" %.3f", r);
        }
        ok = ok && hi / lo <= 2;
        d += fmt(" (spread %.2f); ", hi / lo);
    }
    {
        const auto& e = engine_stable(2.0 / 3);
        FreeEnergyTable tab(e, 1.02 * e.beta0());
        MomentExperiment ex;
        ex.table = &tab;
        ex.A = 2;
        ex.n_pairs = 20000;
        ex.seed = 6;
        ex.workers = default_workers();
        ex.h_list = dyadic_h_list(ex.T());
        auto pairs = sample_pairs(ex);
        double lo = 1e300, hi = 0;
        d += fmt("gamma 2/3, T %.0f: E N_H / psi_H =", ex.T());
        for (double H = 16; H <= ex.T() / 8; H *= 2)
        {
            auto nt = nh_tail(ex, pairs, H);
            double r = nt.mean * nt.reference;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            d += fmt(" %.3f", r);
        }
        ok = ok && hi / lo <= 2;
        d += fmt(" (spread %.2f)", hi / lo);
    }
    return {ok, d};
}

Outcome c12()
{
    const auto& e = engine_stable(0.8);
    FreeEnergyTable tab(e, 1.05 * e.beta0());
    MomentExperiment ex;
    ex.table = &tab;
    ex.A = 2;
    ex.n_pairs = 400000;
    ex.seed = 9;
    ex.workers = default_workers();
    auto r = overshoot_ratio_moment(ex, 0.125, {10, 30, 100});
    bool ok = true;
    std::string d;
    for (const auto& m : r)
    {
        ok = ok && m.mean + 2 * m.std_err < 1;
        d += fmt("v %g: %.4f +- %.4f; ", m.v, m.mean, m.std_err);
    }
    double a = e.alpha(), q = overshoot_limit_quadrature(a, 0.125);
    double closed = std::sin(kPi * a) / std::sin(kPi * (a + 0.125));
    ok = ok && std::abs(q - closed) <= 1e-3;
    d += fmt("limit %.6f vs %.6f", q, closed);
    return {ok, d};
}

Outcome c13()
{
    SlowFunction one = [](double) { return 1.0; };
    double worst_psi = 0;
    for (double H : {1.0, 4.0, 64.0})
        for (double T : {100.0, 1e4})
            worst_psi = std::max(worst_psi, std::abs(psi_H(one, H, T) - std::log(2 * T / H)));
    double r = R_function(one, 1e8) / std::pow(std::log(1e8), 2);
    // phi = log^kappa, kappa = 1, gives L = log^{-3/2}
    SlowFunction lg = [](double s) { return std::pow(std::log(std::exp(1.0) + s), -1.5); };
    double slope = std::log(R_function(lg, 1e9) / R_function(lg, 1e7)) /
                   std::log(std::log(1e9) / std::log(1e7));
    bool ok = worst_psi < 1e-9 && std::abs(r / 0.5 - 1) <= 0.02 && std::abs(slope / 4 - 1) <= 0.05;
    return {ok, fmt("psi err %.1e; R/(log t)^2 = %.5f at 1e8; kappa 1 slope %.4f", worst_psi, r, slope)};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c14()
{
    // shipped configs, shrunk where a full run would not fit the budget
    std::vector<std::pair<std::string, nlohmann::json>> runs{
        {"kernel_info", nlohmann::json::object()},
        {"free_energy_scan", nlohmann::json::object()},
        {"quenched_scan", {{"n_samples", 200}}},
        {"jensen_check", {{"n_samples", 2000}}},
        {"overlap_moments", {{"n_pairs", 2000}}},
        {"overshoot_moments", {{"n_pairs", 20000}, {"vs", {10, 30}}, {"n_pairs_dt", 500}}},
        {"block_moments", {{"n_disorder", 20}, {"steps", 200}, {"n_pairs", 1000}}},
        {"critical_shift_scan", {{"n_samples", 10}}}};
    auto root = fs::temp_directory_path() / "rwpm_acceptance_14";
    int same = 0, total = 0;
    std::string d;
    for (auto& [name, patch] : runs)
    {
        auto cfg = nlohmann::json::parse(slurp(fs::path(RWPM_SOURCE_DIR) / "configs" / (name + ".json")));
        cfg.update(patch);
        std::vector<std::string> outs;
        for (int rep = 0; rep < 2; ++rep)
        {
            RunOptions o;
            o.quiet = true;
            o.workers = rep + 1;
            o.out_dir = (root / (name + std::to_string(rep))).string();
            fs::remove_all(o.out_dir);
            auto r = run_experiment(cfg, o);
            if (r.exit_code != 0)
                return {false, name + ": exit " + std::to_string(r.exit_code) + " " + r.error};
            std::string all;
            for (const auto& f : r.files)
                if (f.size() > 4 && f.substr(f.size() - 4) == ".csv")
                    all += slurp(f);
            outs.push_back(all);
        }
        ++total;
        if (!outs[0].empty() && outs[0] == outs[1])
            ++same;
        else
            d += name + " differs; ";
    }
    fs::remove_all(root);
    return {same == total, d + fmt("%d/%d configs byte-identical across reruns (1 vs 2 workers)", same, total)};
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 14));
    CLI11_PARSE(app, argc, argv);

    std::map<int, Criterion> all{
        {1, {"beta0 of SRW(3) against the Watson integral", 5, c1}},
        {2, {"homogeneous critical exponent", 180, c2}},
        {3, {"Doney renewal asymptotics", 120, c3}},
        {4, {"tail exponent of K'", 30, c4}},
        {5, {"local limit residual", 60, c5}},
        {6, {"tilted kernel normalization and F'", 30, c6}},
        {7, {"quenched/annealed consistency", 600, c7}},
        {8, {"w-weight suite", 300, c8}},
        {9, {"monotonicity in rho", 600, c9}},
        {10, {"renewal combinatorics oracle", 60, c10}},
        {11, {"N_H scaling", 600, c11}},
        {12, {"overshoot ratio moment", 300, c12}},
        {13, {"psi and R asymptotics", 30, c13}},
        {14, {"determinism", 60, c14}}};

    int failed = 0;
    for (auto& [id, c] : all)
    {
        if (only && id != only)
            continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = dt <= c.budget_s;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d %s: %s | %s | %.1f s%s\n", id, pass ? "PASS" : "FAIL",
                    c.name.c_str(), o.detail.c_str(), dt, in_time ? "" : " (over budget)");
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
