#include "rwpm/runner.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include "rwpm/homogeneous.hpp"
#include "rwpm/io.hpp"
#include "rwpm/moments.hpp"
#include "rwpm/parallel.hpp"
#include "rwpm/quenched.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/stats.hpp"

namespace rwpm
{
using json = nlohmann::json;

std::string Diagnostic::str() const
{
    std::string s = level == Level::error ? "error: " : "note: ";
    if (!field.empty())
        s += field + ": ";
    return s + message;
}

bool has_errors(const std::vector<Diagnostic>& d)
{
    for (const auto& x : d)
        if (x.level == Diagnostic::Level::error)
            return true;
    return false;
}

namespace
{
//---------------------------------------------------------------------------//
// schema

enum class Kind
{
    number,
    integer,
    number_list
};

struct Field
{
    std::string name;
    Kind kind;
    bool required;
    std::function<bool(double)> ok;
    std::string rule;
};

struct KernelInfo
{
    bool valid = false;
    bool srw = true;
    int d = 1;
    double gamma = 0;
    bool transient() const { return srw ? d >= 3 : gamma < 1; }
    double alpha() const { return srw ? d / 2.0 - 1 : (1 - gamma) / gamma; }
};

struct Ctx;
using Diags = std::vector<Diagnostic>;

struct ExperimentDef
{
    std::vector<Field> fields;
    // exactly one of these must be present
    std::vector<std::string> one_of;
    bool needs_transient = true;
    bool stochastic = true;
    std::function<void(const json&, const KernelInfo&, Diags&)> domain;
    std::function<void(Ctx&)> run;
};

const auto positive = [](double x) { return x > 0; };
const auto unit_open = [](double x) { return x > 0 && x < 1; };
const auto rho_range = [](double x) { return x >= 0 && x < 1; };
const auto non_negative = [](double x) { return x >= 0; };
const auto at_least_two = [](double x) { return x >= 2; };

Field num(std::string n, bool req, std::function<bool(double)> ok = positive,
          std::string rule = "must be > 0")
{
    return {std::move(n), Kind::number, req, std::move(ok), std::move(rule)};
}
Field integer(std::string n, bool req, std::function<bool(double)> ok = positive,
              std::string rule = "must be >= 1")
{
    return {std::move(n), Kind::integer, req, std::move(ok), std::move(rule)};
}
Field list(std::string n, bool req, std::function<bool(double)> ok = positive,
           std::string rule = "entries must be > 0")
{
    return {std::move(n), Kind::number_list, req, std::move(ok), std::move(rule)};
}

void err(Diags& d, std::string field, std::string msg)
{
    d.push_back({Diagnostic::Level::error, std::move(field), std::move(msg)});
}
void note(Diags& d, std::string field, std::string msg)
{
    d.push_back({Diagnostic::Level::note, std::move(field), std::move(msg)});
}

KernelInfo check_kernel(const json& cfg, Diags& d)
{
    KernelInfo k;
    if (!cfg.contains("kernel"))
    {
        err(d, "kernel", "missing field");
        return k;
    }
    const json& j = cfg["kernel"];
    if (!j.is_object())
    {
        err(d, "kernel", "must be an object");
        return k;
    }
    if (!j.contains("type") || !j["type"].is_string())
    {
        err(d, "kernel.type", "missing field (\"srw\" or \"stable\")");
        return k;
    }
    std::string type = j["type"];
    std::set<std::string> known;
    if (type == "srw")
    {
        known = {"type", "d"};
        if (!j.contains("d"))
            err(d, "kernel.d", "missing field");
        else if (!j["d"].is_number_integer() || j["d"].get<long>() < 1 ||
                 j["d"].get<long>() > kMaxDim)
            err(d, "kernel.d", "must be an integer in [1, " + std::to_string(kMaxDim) + "]");
        else
        {
            k.valid = true;
            k.d = j["d"].get<int>();
        }
    }
    else if (type == "stable")
    {
        known = {"type", "gamma", "phi", "truncation_radius"};
        k.srw = false;
        if (!j.contains("gamma"))
            err(d, "kernel.gamma", "missing field");
        else if (!j["gamma"].is_number() || !(j["gamma"].get<double>() > 0) ||
                 !(j["gamma"].get<double>() < 2))
            err(d, "kernel.gamma", "must be a number in (0, 2)");
        else
        {
            k.valid = true;
            k.gamma = j["gamma"];
        }
        if (j.contains("phi"))
        {
            const json& p = j["phi"];
            if (!p.is_object() || !p.contains("family") || !p["family"].is_string())
                err(d, "kernel.phi", "must be {\"family\": \"constant\" | \"log_power\", ...}");
            else if (p["family"] == "log_power")
            {
                if (!p.contains("kappa") || !p["kappa"].is_number())
                    err(d, "kernel.phi.kappa", "missing number");
            }
            else if (p["family"] != "constant")
                err(d, "kernel.phi.family", "unknown family (constant, log_power)");
        }
        if (j.contains("truncation_radius") &&
            (!j["truncation_radius"].is_number_integer() ||
             j["truncation_radius"].get<long long>() < 64))
            err(d, "kernel.truncation_radius", "must be an integer >= 64");
    }
    else
    {
        err(d, "kernel.type", "unknown type \"" + type + "\" (srw, stable)");
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.empty() && !known.count(it.key()))
            note(d, "kernel." + it.key(), "unknown field ignored");
    return k;
}

void check_field(const json& cfg, const Field& f, Diags& d)
{
    if (!cfg.contains(f.name))
    {
        if (f.required)
            err(d, f.name, "missing field");
        return;
    }
    const json& v = cfg[f.name];
    auto check_one = [&](const json& x, const std::string& where) {
        if (!x.is_number())
        {
            err(d, where, "must be a number");
            return;
        }
        if (f.kind == Kind::integer && !x.is_number_integer())
        {
            err(d, where, "must be an integer");
            return;
        }
        if (!f.ok(x.get<double>()))
            err(d, where, f.rule);
    };
    if (f.kind == Kind::number_list)
    {
        if (!v.is_array() || v.empty())
        {
            err(d, f.name, "must be a non-empty array of numbers");
            return;
        }
        for (std::size_t i = 0; i < v.size(); ++i)
            check_one(v[i], f.name + "[" + std::to_string(i) + "]");
    }
    else
    {
        check_one(v, f.name);
    }
}

//---------------------------------------------------------------------------//
// run context

struct Ctx
{
    explicit Ctx(const json& j) : cfg(j) {}

    const json& cfg;
    const TransitionEngine* engine = nullptr;
    std::uint64_t seed = 0;
    int workers = 1;
    bool quiet = false;
    std::deque<CsvTable> tables;
    json summary = json::object();
    std::vector<std::string> checks;

    CsvTable& table(std::string name, std::vector<std::string> cols)
    {
        tables.emplace_back(std::move(name), std::move(cols));
        return tables.back();
    }
    void check(bool ok, const std::string& what)
    {
        checks.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
        log(checks.back());
    }
    void log(const std::string& s) const
    {
        if (!quiet)
            std::cout << s << "\n" << std::flush;
    }
    const TransitionEngine& e() const { return *engine; }

    double number(const std::string& n, double def) const
    {
        return cfg.contains(n) ? cfg[n].get<double>() : def;
    }
    std::size_t count(const std::string& n, std::size_t def) const
    {
        return cfg.contains(n) ? cfg[n].get<std::size_t>() : def;
    }
    std::vector<double> numbers(const std::string& n, std::vector<double> def = {}) const
    {
        return cfg.contains(n) ? cfg[n].get<std::vector<double>>() : def;
    }
    double beta() const
    {
        return cfg.contains("beta") ? cfg["beta"].get<double>()
                                    : cfg["beta_factor"].get<double>() * e().beta0();
    }
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double beta0_of(const TransitionEngine& e)
{
    return e.transient() ? e.beta0() : 0.0;
}

//---------------------------------------------------------------------------//
// experiments

void run_kernel_info(Ctx& c)
{
    const auto& e = c.e();
    auto& t = c.table("kernel_info", {"kernel", "dim", "alpha", "transient", "beta0"});
    double b0 = beta0_of(e);
    t.add({e.kernel().describe(), e.dim(), e.alpha(), e.transient(), b0});
    c.summary["beta0"] = b0;
    c.summary["alpha"] = e.alpha();
    c.summary["transient"] = e.transient();
    c.log(e.kernel().describe() + ": beta0 = " + format_double(b0) +
          ", alpha = " + fmt(e.alpha()) + ", transient = " + (e.transient() ? "true" : "false"));
}

void run_free_energy_scan(Ctx& c)
{
    const auto& e = c.e();
    double b0 = beta0_of(e);
    std::vector<double> betas;
    if (c.cfg.contains("betas"))
        betas = c.numbers("betas");
    else
        for (double f : c.numbers("beta_factors"))
            betas.push_back(f * b0);
    auto& t = c.table("free_energy", {"beta", "F", "F_prime", "mean_gap"});
    bool has_b0 = false, b0_zero = true;
    for (double b : betas)
    {
        double F = solve_free_energy(e, b);
        double mean = std::numeric_limits<double>::quiet_NaN(), Fp = 0;
        if (b >= b0)
        {
            mean = b * e.laplace_moment(F);
            Fp = std::isfinite(mean) ? 1 / (b * mean) : 0.0;
        }
        if (b == b0)
        {
            has_b0 = true;
            b0_zero = b0_zero && F == 0;
        }
        t.add({b, F, Fp, mean});
        c.log("beta " + fmt(b) + "  F " + fmt(F) + "  F' " + fmt(Fp));
    }
    if (has_b0)
        c.check(b0_zero, "F(beta0) = 0");
    if (!c.cfg.contains("renewal_t_list"))
        return;
    auto ts = c.numbers("renewal_t_list");
    double tmax = *std::max_element(ts.begin(), ts.end());
    auto& r = c.table("renewal", {"beta", "t", "u", "u_beta"});
    for (double b : betas)
    {
        if (!(b > b0))
            continue;
        FreeEnergyTable tab(e, b);
        tab.solve_renewal(tmax, default_delta(tab.F()));
        for (double x : ts)
            r.add({b, x, tab.u(x), tab.u_beta(x)});
    }
}

void run_critical_exponent(Ctx& c)
{
    const auto& e = c.e();
    auto betas = beta_grid_near_critical(e, c.number("dbeta_lo", 1e-3), c.number("dbeta_hi", 1e-2),
                                         int(c.count("n", 12)));
    auto fit = critical_exponent_fit(e, betas);
    auto& t = c.table("critical_exponent", {"beta", "dbeta", "F"});
    for (std::size_t i = 0; i < betas.size(); ++i)
        t.add({betas[i], fit.dbeta[i], fit.F[i]});
    double a = std::abs(e.alpha());
    double expect = a > 0 ? std::max(1.0, 1 / a) : std::numeric_limits<double>::quiet_NaN();
    c.summary["nu"] = fit.nu;
    c.summary["nu_expected"] = expect;
    c.summary["log_prefactor"] = fit.log_prefactor;
    c.summary["r2"] = fit.r2;
    c.log("nu = " + fmt(fit.nu) + " (r2 " + fmt(fit.r2) + ")");
    if (std::isfinite(expect))
        c.check(std::abs(fit.nu / expect - 1) <= 0.1,
                "nu = " + fmt(fit.nu) + " within 10% of " + fmt(expect));
}

void run_doney_check(Ctx& c)
{
    const auto& e = c.e();
    auto ts = c.numbers("t_list", {1e4});
    double delta = c.number("delta", 0.01);
    double tmax = *std::max_element(ts.begin(), ts.end());
    auto u = renewal_density(e, e.beta0(), tmax, delta);
    double a = e.alpha(), target = a * std::sin(kPi * a) / kPi;
    auto& t = c.table("doney", {"t", "u", "u_t2_K", "target", "rel_err"});
    for (double x : ts)
    {
        auto k = std::size_t(std::llround(x / delta));
        double s = u[k] * x * x * e.K(x);
        t.add({x, u[k], s, target, s / target - 1});
        c.check(std::abs(s / target - 1) <= 0.05,
                "t = " + fmt(x) + ": u t^2 K = " + fmt(s) + " within 5% of " + fmt(target));
    }
}

void run_llt_check(Ctx& c)
{
    const auto& e = c.e();
    auto ts = c.numbers("t_list", {1e2, 1e3, 1e4});
    double ys = c.number("y_scale", 3);
    auto ny = c.count("n_y", 200);
    auto& t = c.table("llt", {"t", "y_max", "n_y", "residual"});
    std::vector<double> res;
    for (double x : ts)
    {
        double scale = e.transient() ? e.K(x) : e.return_prob(x);
        auto ymax = std::int64_t(std::floor(ys / scale));
        std::set<std::int64_t> pts;
        for (std::size_t i = 0; i < ny; ++i)
            pts.insert(std::llround(double(ymax) * double(i) / double(std::max<std::size_t>(ny - 1, 1))));
        std::vector<Site> sites;
        for (auto y : pts)
            sites.push_back(Site::axis(e.dim(), y));
        double r = e.llt_residual(x, sites);
        res.push_back(r);
        t.add({x, ymax, sites.size(), r});
        c.log("t " + fmt(x) + "  residual " + fmt(r));
    }
    bool dec = true;
    for (std::size_t i = 1; i < res.size(); ++i)
        dec = dec && res[i] < res[i - 1];
    c.check(dec, "LLT residual decreasing in t");
    c.summary["last_residual"] = res.back();
}

QuenchedSolveSpec quenched_spec(const Ctx& c, double rho, double beta)
{
    QuenchedSolveSpec s;
    s.rho = rho;
    s.beta = beta;
    s.T = c.number("T", 1);
    s.delta = c.number("delta", 0.01);
    s.engine = c.engine;
    return s;
}

void run_quenched_scan(Ctx& c)
{
    const auto& e = c.e();
    double beta = c.beta();
    auto rhos = c.numbers("rhos");
    auto n = c.count("n_samples", 0);
    auto sp = quenched_spec(c, 0, beta);
    sp.validate();
    double log_z_ann = std::log(free_annealed_partition(e, beta, sp.T, sp.delta).back());
    double log_zc_ann = std::log(constrained_annealed_direct(e, beta, sp.T, sp.delta).back());
    auto& t = c.table("quenched",
                      {"rho", "beta", "T", "delta", "n_samples", "F_hat", "F_hat_stderr",
                       "F_annealed_T", "Z_ratio", "Z_ratio_stderr", "dF_first", "dF_first_stderr",
                       "grid_flags"});
    auto& pt = c.table("partitions", {"kernel", "gamma_or_d", "kappa", "rho", "beta", "T", "delta",
                                      "path_seed", "log_zc", "log_z"});
    const auto& k = e.kernel();
    std::string kname = k.is_srw() ? "srw" : "stable";
    double shape = k.is_srw() ? double(k.dim()) : k.gamma();
    std::vector<double> first;
    for (std::size_t ri = 0; ri < rhos.size(); ++ri)
    {
        sp.rho = rhos[ri];
        // same seed for every rho: common random numbers
        auto runs = quenched_partition_samples(sp, n, c.seed, c.workers);
        for (const auto& r : runs)
            pt.add({kname, shape, k.phi().exponent(), sp.rho, beta, sp.T, sp.delta, r.seed, r.log_zc,
                    r.log_z});
        std::vector<double> f(n), z(n);
        long flags = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            f[i] = runs[i].log_zc / sp.T;
            z[i] = std::exp(runs[i].log_z - log_z_ann);
            flags += runs[i].grid_error_flag;
        }
        auto fe = mean_stderr(f), ze = mean_stderr(z);
        if (ri == 0)
            first = f;
        std::vector<double> diff(n);
        for (std::size_t i = 0; i < n; ++i)
            diff[i] = first[i] - f[i];
        auto de = mean_stderr(diff);
        t.add({sp.rho, beta, sp.T, sp.delta, n, fe.mean, fe.std_err, log_zc_ann / sp.T, ze.mean,
               ze.std_err, de.mean, de.std_err, flags});
        c.log("rho " + fmt(sp.rho) + "  F_hat " + fmt(fe.mean) + " +- " + fmt(fe.std_err) +
              "  Z/z " + fmt(ze.mean) + " +- " + fmt(ze.std_err));
        if (sp.rho == 0)
            c.check(std::abs(ze.mean - 1) < 1e-3,
                    "rho = 0 reproduces the annealed partition function (Z/z = " + fmt(ze.mean) + ")");
        else
            c.check(std::abs(ze.mean - 1) <= 3 * ze.std_err,
                    "rho = " + fmt(sp.rho) + ": E Z / z = " + fmt(ze.mean) + " within 3 stderr of 1");
        if (ri > 0 && sp.rho > rhos[0])
            c.check(de.mean >= -3 * de.std_err,
                    "F_hat(" + fmt(rhos[0]) + ") >= F_hat(" + fmt(sp.rho) + ") within 3 joint stderr");
    }
}

void run_jensen_check(Ctx& c)
{
    const auto& e = c.e();
    auto rhos = c.numbers("rhos");
    auto ts = c.numbers("t_list", {1, 10, 100});
    auto n = c.count("n_samples", 0);
    auto& t = c.table("jensen", {"rho", "t", "w_mean", "w_stderr", "log_w_mean", "log_w_stderr",
                                 "log_w_over_rho", "w_max", "w_bound", "c0"});
    std::map<double, std::vector<double>> per_rho;
    for (double rho : rhos)
    {
        QuenchedSolveSpec sp{rho, e.beta0(), *std::max_element(ts.begin(), ts.end()), 1, &e};
        auto r = log_w_expectation(sp, ts, n, c.seed, c.workers);
        double c0 = rho > 0 ? measure_c0(e, rho).value : 0.0;
        for (std::size_t k = 0; k < ts.size(); ++k)
        {
            std::vector<double> w;
            for (double v : r[k].values)
                w.push_back(std::exp(v));
            auto we = mean_stderr(w);
            double wmax = *std::max_element(w.begin(), w.end());
            double bound = e.K((1 - rho) * ts[k]) / e.K(ts[k]);
            double lr = rho > 0 ? r[k].mean / rho : 0.0;
            per_rho[rho].push_back(lr);
            t.add({rho, ts[k], we.mean, we.std_err, r[k].mean, r[k].std_err, lr, wmax, bound, c0});
            c.check(std::abs(we.mean - 1) <= 3 * we.std_err,
                    "rho = " + fmt(rho) + ", t = " + fmt(ts[k]) + ": E w = " + fmt(we.mean) +
                        " within 3 stderr of 1");
            c.check(wmax <= bound * (1 + 1e-9) && bound <= std::exp(c0 * rho) * (1 + 1e-9),
                    "rho = " + fmt(rho) + ", t = " + fmt(ts[k]) + ": w <= K((1-rho)t)/K(t) <= e^{c0 rho}");
        }
    }
    for (double rho : rhos)
        if (rho > 0 && per_rho.count(rho / 2))
            for (std::size_t k = 0; k < ts.size(); ++k)
            {
                double a = per_rho[rho][k], b = per_rho[rho / 2][k];
                c.check(std::abs(b / a - 1) <= 0.2, "t = " + fmt(ts[k]) + ": E log w / rho stable under rho " +
                                                        fmt(rho) + " -> " + fmt(rho / 2));
            }
}

MomentExperiment moment_exp(const Ctx& c, const FreeEnergyTable& tab)
{
    MomentExperiment ex;
    ex.table = &tab;
    ex.A = c.number("A", 4);
    ex.eta = c.number("eta", 0.25);
    ex.n_pairs = c.count("n_pairs", 1000);
    ex.seed = c.seed;
    ex.workers = c.workers;
    ex.h_list = c.numbers("h_list");
    return ex;
}

void run_block_moments(Ctx& c)
{
    const auto& e = c.e();
    double beta = c.beta();
    FreeEnergyTable tab(e, beta);
    auto ex = moment_exp(c, tab);
    auto steps = c.count("steps", 800);
    auto nd = c.count("n_disorder", 0);
    auto C_A = measure_C_A(tab, ex.A, ex.eta);
    auto pairs = sample_pairs(ex);
    double regime = 1 / (1 - ex.eta) * std::pow(ex.A / (ex.A - 1), 2);
    c.summary["C_A"] = C_A.value;
    c.summary["T"] = ex.T();
    auto& t = c.table("block_moments",
                      {"rho", "ratio", "ratio_stderr", "ratio_batch_stderr", "c0", "C_A", "u",
                       "overlap", "overlap_stderr", "overlap_unreliable", "bound", "regime_bound"});
    for (double rho : c.numbers("rhos"))
    {
        // distinct disorder stream from the renewal pairs
        auto mr = moment_ratio_direct(e, beta, ex.A, ex.eta, steps, rho, nd,
                                      task_seed(c.seed, 0x5eed), c.workers);
        double c0 = rho > 0 ? measure_c0(e, rho).value : 0.0;
        double u = 4 * c0 * rho;
        auto ol = overlap_laplace(pairs, u);
        double bound = C_A.value * ol.mean;
        t.add({rho, mr.ratio, mr.std_err, mr.batch_std_err, c0, C_A.value, u, ol.mean, ol.std_err,
               ol.unreliable, bound, regime});
        c.log("rho " + fmt(rho) + "  ratio " + fmt(mr.ratio) + " +- " + fmt(mr.std_err) +
              "  bound " + fmt(bound));
        if (rho == 0)
            c.check(mr.ratio == 1, "rho = 0: moment ratio exactly 1");
        else
            c.check(mr.ratio - 1 <= bound + 3 * (mr.std_err + C_A.value * ol.std_err),
                    "rho = " + fmt(rho) + ": ratio - 1 <= C_A (E e^{4 c0 rho |J|} - 1)");
        if (ol.unreliable)
            c.log("warning: overlap estimate at u = " + fmt(u) + " dominated by one pair");
    }
}

void run_overlap_moments(Ctx& c)
{
    const auto& e = c.e();
    FreeEnergyTable tab(e, c.beta());
    auto ex = moment_exp(c, tab);
    if (ex.h_list.empty())
        ex.h_list = dyadic_h_list(ex.T());
    auto pairs = sample_pairs(ex);
    double r = c.number("r", 2);
    c.summary["T"] = ex.T();
    auto& ot = c.table("overlap_laplace", {"u", "mean", "stderr", "batch_stderr", "max_share",
                                           "unreliable", "holder_bound"});
    double prev = -1;
    bool mono = true;
    for (double u : c.numbers("us"))
    {
        auto ol = overlap_laplace(pairs, u);
        double hb = std::numeric_limits<double>::quiet_NaN();
        try
        {
            hb = holder_split(pairs, u, r);
        }
        catch (const DomainError&)
        {
        }
        ot.add({u, ol.mean, ol.std_err, ol.batch_std_err, ol.max_share, ol.unreliable, hb});
        c.log("u " + fmt(u) + "  E e^{u|J|} - 1 = " + fmt(ol.mean) + " +- " + fmt(ol.std_err) +
              "  holder " + fmt(hb));
        if (ol.unreliable)
            c.log("warning: estimate at u = " + fmt(u) + " dominated by one pair");
        if (std::isfinite(hb))
            c.check(ol.mean <= hb + 3 * ol.std_err, "u = " + fmt(u) + ": Hoelder split bound holds");
        mono = mono && ol.mean >= prev;
        prev = ol.mean;
    }
    c.check(mono, "overlap estimate monotone along the u list");
    auto& st = c.table("nh_summary",
                       {"H", "T_over_H", "mean", "tail_sum", "rate", "reference", "rate_over_reference"});
    auto& tt = c.table("nh_tail", {"H", "k", "tail"});
    auto kmax = c.count("k_max", 0);
    for (double H : ex.h_list)
    {
        NhTail nt;
        try
        {
            nt = nh_tail(ex, pairs, H, kmax);
        }
        catch (const DomainError& x)
        {
            c.log("H " + fmt(H) + ": " + x.what());
            continue;
        }
        st.add({H, ex.T() / H, nt.mean, nt.tail_sum, nt.rate, nt.reference, nt.rate / nt.reference});
        for (std::size_t k = 0; k < nt.tail.size(); ++k)
            tt.add({H, k + 1, nt.tail[k]});
    }
}

void run_overshoot_moments(Ctx& c)
{
    const auto& e = c.e();
    FreeEnergyTable tab(e, c.beta());
    auto ex = moment_exp(c, tab);
    double kappa = c.number("kappa", (1 - 2 * e.alpha()) / 4);
    auto om = overshoot_ratio_moment(ex, kappa, c.numbers("vs"), c.number("eps_w", 0.05));
    double a = e.alpha();
    double limit = overshoot_limit_quadrature(a, kappa);
    double closed = std::sin(kPi * a) / std::sin(kPi * (a + kappa));
    c.summary["limit_quadrature"] = limit;
    c.summary["limit_closed_form"] = closed;
    c.summary["T"] = ex.T();
    c.check(std::abs(limit - closed) <= 1e-3, "v -> inf limit quadrature = " + fmt(limit) +
                                                  " vs sin(pi a)/sin(pi(a+kappa)) = " + fmt(closed));
    auto& t = c.table("overshoot", {"v", "kappa", "mean", "stderr", "accepted", "limit"});
    for (const auto& m : om)
    {
        t.add({m.v, kappa, m.mean, m.std_err, m.accepted, limit});
        c.log("v " + fmt(m.v) + "  E[(S2/S1)^-kappa] = " + fmt(m.mean) + " +- " + fmt(m.std_err) +
              " (" + std::to_string(m.accepted) + ")");
    }
    auto ex_dt = ex;
    ex_dt.n_pairs = c.count("n_pairs_dt", ex.n_pairs);
    ex_dt.seed = task_seed(c.seed, 0xd7);
    auto pairs = sample_pairs(ex_dt, true);
    long viol = 0, trunc = 0;
    for (const auto& p : pairs)
    {
        viol += p.j1 + p.j2 != p.count_to_T || (p.D >= 0 && p.count_to_T > p.D);
        trunc += p.truncated;
    }
    c.check(viol == 0, "|J1| + |J2| = max{j : T_j <= T} <= D_T on " + std::to_string(pairs.size()) +
                           " pairs (" + std::to_string(viol) + " violations)");
    if (trunc > 0)
    {
        c.log("warning: " + std::to_string(trunc) + " pairs did not reach D_T");
        return;
    }
    auto us = c.numbers("us");
    auto& dt = c.table("dt_laplace", {"u", "mean", "stderr", "batch_stderr", "max_share", "unreliable"});
    for (double u : us)
    {
        auto l = dt_laplace(pairs, u);
        dt.add({u, l.mean, l.std_err, l.batch_std_err, l.max_share, l.unreliable});
    }
    auto& th = c.table("dt_threshold", {"target", "u"});
    for (double target : c.numbers("targets", {0.5, 0.25}))
    {
        double u = dt_threshold(pairs, target, us);
        th.add({target, u});
        c.log("E e^{u D_T} - 1 <= " + fmt(target) + " up to u = " + fmt(u));
    }
}

void run_critical_shift_scan(Ctx& c)
{
    const auto& e = c.e();
    auto rhos = c.numbers("rhos");
    auto factors = c.numbers("beta_factors");
    auto n = c.count("n_samples", 0);
    auto sp = quenched_spec(c, 0, e.beta0());
    sp.validate();
    // level of the finite-T estimator at the annealed critical point
    double level = std::log(constrained_annealed_direct(e, e.beta0(), sp.T, sp.delta).back()) / sp.T;
    auto& t = c.table("critical_shift_scan", {"rho", "beta", "beta_factor", "F_hat", "F_hat_stderr",
                                              "F_annealed_T"});
    auto& s = c.table("critical_shift", {"rho", "level", "beta_c_est", "shift_factor"});
    for (double rho : rhos)
    {
        double prev_f = 0, prev_b = 0, bc = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < factors.size(); ++i)
        {
            double b = factors[i] * e.beta0();
            sp.rho = rho;
            sp.beta = b;
            auto est = quenched_free_energy_estimate(sp, n, c.seed, c.workers);
            double ann = std::log(constrained_annealed_direct(e, b, sp.T, sp.delta).back()) / sp.T;
            t.add({rho, b, factors[i], est.mean, est.std_err, ann});
            if (std::isnan(bc) && est.mean >= level)
                bc = i == 0 ? b : prev_b + (b - prev_b) * (level - prev_f) / (est.mean - prev_f);
            prev_f = est.mean;
            prev_b = b;
        }
        s.add({rho, level, bc, bc / e.beta0() - 1});
        c.log("rho " + fmt(rho) + "  beta_c estimate " + fmt(bc));
    }
}

//---------------------------------------------------------------------------//
void check_rhos(const json& cfg, Diags& d)
{
    if (cfg.contains("rhos") && cfg["rhos"].is_array())
        for (const auto& r : cfg["rhos"])
            if (r.is_number() && !rho_range(r.get<double>()))
                err(d, "rhos", "entries must lie in [0, 1)");
}

void check_grid(const json& cfg, Diags& d)
{
    if (!cfg.contains("T") || !cfg.contains("delta") || !cfg["T"].is_number() ||
        !cfg["delta"].is_number())
        return;
    double T = cfg["T"], dt = cfg["delta"];
    if (!(T > 0 && dt > 0))
        return;
    double n = std::round(T / dt);
    if (n < 1 || std::abs(n * dt - T) > 1e-9 * T)
        err(d, "delta", "must divide T");
    else if (n > 2e6)
        err(d, "delta", "grid of " + fmt(n) + " steps exceeds 2e6");
}

const std::map<std::string, ExperimentDef>& registry()
{
    static const std::map<std::string, ExperimentDef> r = [] {
        std::map<std::string, ExperimentDef> m;
        auto beta_fields = [] {
            return std::vector<Field>{num("beta", false), num("beta_factor", false)};
        };
        auto cat = [](std::vector<Field> a, const std::vector<Field>& b) {
            a.insert(a.end(), b.begin(), b.end());
            return a;
        };
        auto pairs_fields = [](bool eta) {
            std::vector<Field> f{num("A", true, [](double x) { return x > 1; }, "must be > 1"),
                                 integer("n_pairs", true, at_least_two, "must be >= 2"),
                                 list("h_list", false, [](double x) {
                                     return x >= 1 && std::log2(x) == std::round(std::log2(x));
                                 }, "entries must be dyadic (1, 2, 4, ...)")};
            if (eta)
                f.push_back(num("eta", false, unit_open, "must lie in (0, 1)"));
            return f;
        };

        m["kernel-info"] = {{}, {}, false, false, nullptr, run_kernel_info};
        m["free-energy-scan"] = {{list("betas", false, non_negative, "entries must be >= 0"),
                                  list("beta_factors", false, non_negative, "entries must be >= 0"),
                                  list("renewal_t_list", false, positive, "entries must be > 0")},
                                 {"betas", "beta_factors"},
                                 false,
                                 false,
                                 [](const json& cfg, const KernelInfo& k, Diags& d) {
                                     if (cfg.contains("beta_factors") && k.valid && !k.transient())
                                         err(d, "beta_factors",
                                             "recurrent walk: beta0 = 0, give absolute betas");
                                     if (cfg.contains("renewal_t_list") && k.valid && !k.transient())
                                         err(d, "renewal_t_list", "renewal densities need a transient walk");
                                 },
                                 run_free_energy_scan};
        m["critical-exponent"] = {{num("dbeta_lo", false), num("dbeta_hi", false),
                                   integer("n", false, [](double x) { return x >= 8; }, "must be >= 8")},
                                  {},
                                  false,
                                  false,
                                  [](const json& cfg, const KernelInfo& k, Diags& d) {
                                      if (k.valid && !k.transient())
                                          note(d, "kernel", "recurrent walk: β₀ = 0, homogeneous exponent only");
                                      double lo = cfg.value("dbeta_lo", 1e-3), hi = cfg.value("dbeta_hi", 1e-2);
                                      if (!(hi > lo))
                                          err(d, "dbeta_hi", "must exceed dbeta_lo");
                                  },
                                  run_critical_exponent};
        m["doney-check"] = {{list("t_list", false), num("delta", false)},
                            {},
                            true,
                            false,
                            [](const json&, const KernelInfo& k, Diags& d) {
                                if (k.valid && k.transient() && !(k.alpha() > 0 && k.alpha() < 1))
                                    err(d, "kernel", "doney-check needs alpha in (0, 1) (infinite mean)");
                            },
                            run_doney_check};
        m["llt-check"] = {{list("t_list", false), num("y_scale", false),
                           integer("n_y", false, at_least_two, "must be >= 2")},
                          {},
                          false,
                          false,
                          nullptr,
                          run_llt_check};
        m["quenched-scan"] = {cat(beta_fields(),
                                  {list("rhos", true, rho_range, "entries must lie in [0, 1)"),
                                   num("T", true), num("delta", true),
                                   integer("n_samples", true, at_least_two, "must be >= 2")}),
                              {"beta", "beta_factor"},
                              true,
                              true,
                              [](const json& cfg, const KernelInfo&, Diags& d) { check_grid(cfg, d); },
                              run_quenched_scan};
        m["jensen-check"] = {{list("rhos", true, rho_range, "entries must lie in [0, 1)"),
                              list("t_list", false),
                              integer("n_samples", true, at_least_two, "must be >= 2")},
                             {},
                             true,
                             true,
                             [](const json& cfg, const KernelInfo&, Diags& d) {
                                 if (cfg.contains("rhos") && cfg["rhos"].is_array())
                                     for (const auto& r : cfg["rhos"])
                                         if (r.is_number() && r.get<double>() >= 0.5 && r.get<double>() < 1)
                                             note(d, "rhos",
                                                  "ρ = " + fmt(r.get<double>()) +
                                                      ": w bounds hold for ρ ∈ (0, 1/2); lower bound not covered");
                             },
                             run_jensen_check};
        m["block-moments"] = {cat(cat(beta_fields(), pairs_fields(true)),
                                  {list("rhos", true, rho_range, "entries must lie in [0, 1)"),
                                   integer("steps", false, [](double x) { return x >= 10; }, "must be >= 10"),
                                   integer("n_disorder", true, at_least_two, "must be >= 2")}),
                              {"beta", "beta_factor"},
                              true,
                              true,
                              nullptr,
                              run_block_moments};
        m["overlap-moments"] = {cat(cat(beta_fields(), pairs_fields(false)),
                                    {list("us", true, non_negative, "entries must be >= 0"),
                                     num("r", false, [](double x) { return x > 1; }, "must be > 1"),
                                     integer("k_max", false, non_negative, "must be >= 0")}),
                                {"beta", "beta_factor"},
                                true,
                                true,
                                [](const json&, const KernelInfo& k, Diags& d) {
                                    if (k.valid && k.transient() && !(k.alpha() >= 0.5 && k.alpha() < 1))
                                        note(d, "kernel", "N_H reference exponent 2 alpha - 1 assumes alpha in [1/2, 1)");
                                },
                                run_overlap_moments};
        m["overshoot-moments"] = {cat(cat(beta_fields(), pairs_fields(false)),
                                      {num("kappa", false, non_negative, "must be >= 0"),
                                       list("vs", true), num("eps_w", false, unit_open, "must lie in (0, 1)"),
                                       list("us", true, non_negative, "entries must be >= 0"),
                                       list("targets", false),
                                       integer("n_pairs_dt", false, at_least_two, "must be >= 2")}),
                                  {"beta", "beta_factor"},
                                  true,
                                  true,
                                  [](const json&, const KernelInfo& k, Diags& d) {
                                      if (k.valid && k.transient() && !(k.alpha() > 0 && k.alpha() < 0.5))
                                          err(d, "kernel", "overshoot-moments needs alpha in (0, 1/2)");
                                  },
                                  run_overshoot_moments};
        m["critical-shift-scan"] = {{list("rhos", true, rho_range, "entries must lie in [0, 1)"),
                                     list("beta_factors", true), num("T", true), num("delta", true),
                                     integer("n_samples", true, at_least_two, "must be >= 2")},
                                    {},
                                    true,
                                    true,
                                    [](const json& cfg, const KernelInfo&, Diags& d) { check_grid(cfg, d); },
                                    run_critical_shift_scan};
        return m;
    }();
    return r;
}

const std::set<std::string> kCommon = {"experiment", "kernel", "seed", "workers", "output"};

}  // namespace

std::vector<std::string> experiment_names()
{
    std::vector<std::string> out;
    for (const auto& [k, v] : registry())
        out.push_back(k);
    return out;
}

std::vector<Diagnostic> validate_config(const json& cfg)
{
    Diags d;
    if (!cfg.is_object())
    {
        err(d, "", "config must be a JSON object");
        return d;
    }
    const ExperimentDef* def = nullptr;
    if (!cfg.contains("experiment"))
        err(d, "experiment", "missing field");
    else if (!cfg["experiment"].is_string())
        err(d, "experiment", "must be a string");
    else
    {
        auto it = registry().find(cfg["experiment"].get<std::string>());
        if (it == registry().end())
        {
            std::string names;
            for (const auto& n : experiment_names())
                names += (names.empty() ? "" : ", ") + n;
            err(d, "experiment", "unknown experiment (" + names + ")");
        }
        else
            def = &it->second;
    }
    KernelInfo k = check_kernel(cfg, d);
    if (cfg.contains("seed"))
    {
        if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0))
            err(d, "seed", "must be a non-negative 64-bit integer");
    }
    else if (def && def->stochastic)
        err(d, "seed", "missing field");
    if (cfg.contains("workers") && (!cfg["workers"].is_number_integer() || cfg["workers"].get<long>() < 1))
        err(d, "workers", "must be a positive integer");
    if (cfg.contains("output") && !cfg["output"].is_string())
        err(d, "output", "must be a string");
    if (!def)
        return d;
    std::set<std::string> known = kCommon;
    for (const auto& f : def->fields)
    {
        known.insert(f.name);
        check_field(cfg, f, d);
    }
    if (!def->one_of.empty())
    {
        int present = 0;
        std::string names;
        for (const auto& n : def->one_of)
        {
            present += cfg.contains(n);
            names += (names.empty() ? "" : " or ") + n;
        }
        if (present != 1)
            err(d, names, present == 0 ? "missing field (give exactly one)" : "give exactly one");
    }
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!known.count(it.key()))
            note(d, it.key(), "unknown field ignored");
    if (k.valid && def->needs_transient && !k.transient())
        err(d, "kernel", "recurrent walk: β₀ = 0; " + cfg["experiment"].get<std::string>() +
                             " needs a transient kernel (stable gamma < 1 or srw d >= 3)");
    if (cfg.contains("beta_factor") && cfg["beta_factor"].is_number() && cfg["beta_factor"].get<double>() <= 1)
    {
        std::string exp = cfg["experiment"];
        if (exp != "quenched-scan")
            err(d, "beta_factor", "must be > 1 (the stationary renewal needs beta > beta0)");
    }
    check_rhos(cfg, d);
    if (def->domain)
        def->domain(cfg, k, d);
    return d;
}

JumpKernel kernel_from_json(const json& k)
{
    std::string type = k.at("type");
    if (type == "srw")
        return make_srw_kernel(k.at("d").get<int>());
    if (type == "stable")
    {
        PhiSpec phi;
        if (k.contains("phi") && k["phi"].value("family", "constant") == "log_power")
            phi = PhiSpec::log_power(k["phi"].at("kappa").get<double>());
        std::int64_t radius = k.value("truncation_radius", std::int64_t(1'000'000));
        return make_stable_kernel(k.at("gamma").get<double>(), phi, radius);
    }
    throw DomainError("unknown kernel type " + type);
}

std::string config_hash(const json& cfg)
{
    json c = cfg;
    if (c.is_object())
    {
        c.erase("workers");
        c.erase("output");
    }
    return hex64(fnv1a64(c.dump()));
}

RunResult run_experiment(const json& cfg, const RunOptions& opts)
{
    namespace fs = std::filesystem;
    RunResult res;
    res.diagnostics = validate_config(cfg);
    if (has_errors(res.diagnostics))
    {
        res.exit_code = 2;
        res.error = "config invalid";
        return res;
    }
    auto start = std::chrono::steady_clock::now();
    std::string hash = config_hash(cfg);
    std::uint64_t seed = cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 0;
    int workers = opts.workers > 0 ? opts.workers
                                   : cfg.contains("workers") ? cfg["workers"].get<int>() : default_workers();
    std::string out = !opts.out_dir.empty() ? opts.out_dir : cfg.value("output", std::string("results"));
    const auto& def = registry().at(cfg["experiment"].get<std::string>());

    Ctx c(cfg);
    c.seed = seed;
    c.workers = workers;
    c.quiet = opts.quiet;
    bool truncated = false;
    std::unique_ptr<TransitionEngine> engine;
    try
    {
        engine = std::make_unique<TransitionEngine>(kernel_from_json(cfg["kernel"]));
        c.engine = engine.get();
        def.run(c);
    }
    catch (const std::exception& x)
    {
        truncated = true;
        res.exit_code = 3;
        res.error = x.what();
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json files = json::array();
    try
    {
        fs::create_directories(out);
        for (const auto& t : c.tables)
        {
            std::string p = (fs::path(out) / (t.name() + ".csv")).string();
            write_file_atomic(p, t.render(seed, hash));
            res.files.push_back(p);
            files.push_back({{"file", t.name() + ".csv"}, {"rows", t.rows()}, {"columns", t.columns()}});
        }
        json m;
        m["config"] = cfg;
        m["config_hash"] = hash;
        m["version"] = kVersion;
        m["seed"] = seed;
        m["workers"] = workers;
        m["wall_time_s"] = wall;
        m["files"] = files;
        m["summary"] = c.summary;
        m["checks"] = c.checks;
        m["truncated"] = truncated;
        if (!res.error.empty())
            m["error"] = res.error;
        json notes = json::array();
        for (const auto& d : res.diagnostics)
            notes.push_back(d.str());
        m["diagnostics"] = notes;
        std::string mp = (fs::path(out) / "manifest.json").string();
        write_file_atomic(mp, m.dump(2) + "\n");
        res.files.push_back(mp);
        res.manifest = std::move(m);
    }
    catch (const std::exception& x)
    {
        if (res.exit_code == 0)
            res.exit_code = 1;
        res.error = res.error.empty() ? x.what() : res.error + "; " + x.what();
    }
    return res;
}

}  // namespace rwpm
