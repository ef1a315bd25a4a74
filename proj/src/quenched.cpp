#include "rwpm/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rwpm/parallel.hpp"
#include "rwpm/stats.hpp"

namespace rwpm
{
namespace
{
constexpr double kBig = 1e150;
const double kLogBig = std::log(kBig);

// maximal runs of equal positions: [start, end) with value
struct Run
{
    std::size_t start, end;
    Site site;
};

std::vector<Run> runs_of(const std::vector<Site>& y, std::size_t k0)
{
    std::vector<Run> r;
    for (std::size_t k = k0; k < y.size(); ++k)
    {
        if (r.empty() || !(r.back().site == y[k]))
            r.push_back({k, k + 1, y[k]});
        else
            r.back().end = k + 1;
    }
    return r;
}

double log_plus_scaled(double L, double I)
{
    // log(1 + e^L I)
    if (L > 0)
        return L + std::log(std::exp(-L) + I);
    return std::log1p(std::exp(L) * I);
}
}  // namespace

//---------------------------------------------------------------------------//
void QuenchedSolveSpec::validate() const
{
    if (!engine)
        throw DomainError("quenched spec: no transition engine");
    if (!(rho >= 0 && rho < 1))
        throw DomainError("quenched spec: rho must be in [0, 1)");
    if (!(beta >= 0))
        throw DomainError("quenched spec: beta must be >= 0");
    if (!(T > 0 && delta > 0))
        throw DomainError("quenched spec: need T > 0 and delta > 0");
    double n = T / delta;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw DomainError("quenched spec: delta must divide T");
    if (std::round(n) > 2e6)
        throw DomainError("quenched spec: grid too large for the O(n^2) recursion");
}

std::size_t QuenchedSolveSpec::steps() const
{
    return std::size_t(std::llround(T / delta));
}

double kw(const QuenchedSolveSpec& spec, double s, double t, const DisorderPath& Y)
{
    spec.validate();
    if (!(0 <= s && s <= t && t <= Y.horizon * (1 + 1e-12)))
        throw DomainError("kw: need 0 <= s <= t <= horizon");
    const auto& e = *spec.engine;
    return e.beta0() * e.transition_prob((1 - spec.rho) * (t - s), Y.at(t) - Y.at(s));
}

double w_weight(const QuenchedSolveSpec& spec, double s, double t, const DisorderPath& Y)
{
    if (!(s < t))
        throw DomainError("w_weight: need s < t");
    return kw(spec, s, t, Y) / spec.engine->K(t - s);
}

//---------------------------------------------------------------------------//
QuenchedSolver::QuenchedSolver(const QuenchedSolveSpec& spec, std::size_t cache_entries)
    : spec_(spec), n_(0), cap_(std::max<std::size_t>(cache_entries, 4))
{
    spec_.validate();
    n_ = spec_.steps();
}

const std::vector<double>& QuenchedSolver::lags(const Site& d)
{
    auto it = cache_.find(d);
    if (it != cache_.end())
    {
        lru_.splice(lru_.begin(), lru_, it->second.pos);
        return it->second.v;
    }
    ++misses_;
    if (cache_.size() >= cap_)
    {
        cache_.erase(lru_.back());
        lru_.pop_back();
    }
    lru_.push_front(d);
    auto& e = cache_[d];
    e.pos = lru_.begin();
    e.v = spec_.engine->transition_lags(d, (1 - spec_.rho) * spec_.delta, n_);
    return e.v;
}

std::vector<Site> QuenchedSolver::snap(const DisorderPath& Y, bool* collided) const
{
    if (Y.horizon + 1e-9 * spec_.T < spec_.T)
        throw DomainError("snap: path horizon shorter than T");
    std::vector<Site> y(n_ + 1, Y.origin());
    bool clash = false;
    std::size_t last = 0;
    Site pos = Y.origin();
    std::size_t e = 0;
    for (; e < Y.times.size() && Y.times[e] <= spec_.T; ++e)
    {
        auto node = std::size_t(std::max<long long>(1, std::llround(Y.times[e] / spec_.delta)));
        node = std::min(node, n_);
        if (e > 0 && node == last)
            clash = true;
        for (std::size_t k = last; k < node; ++k)
            y[k] = pos;
        pos = Y.positions[e];
        last = node;
    }
    for (std::size_t k = last; k <= n_; ++k)
        y[k] = pos;
    if (collided)
        *collided = clash;
    return y;
}

std::vector<double> QuenchedSolver::sweep(const std::vector<Site>& y, std::size_t k0,
                                          double* log_z)
{
    if (y.size() != n_ + 1 || k0 > n_)
        throw DomainError("sweep: position vector does not match the grid");
    const double beta = spec_.beta, dt = spec_.delta;
    const double denom = 1 - 0.5 * dt * beta;
    if (!(denom > 0))
        throw NumericalError("quenched recursion: delta * beta too large");
    std::size_t m = n_ - k0;
    std::vector<double> W(m + 1), out(m + 1);
    auto runs = runs_of(y, k0);
    double L = 0, I = 0;
    W[0] = beta;
    out[0] = std::log(beta);
    for (std::size_t i = 1; i <= m; ++i)
    {
        std::size_t k = k0 + i;
        double acc = 0, force = 0;
        for (const auto& r : runs)
        {
            if (r.start >= k)
                break;
            const auto& v = lags(y[k] - r.site);
            std::size_t a = r.start - k0, b = std::min(r.end - k0, i);
            if (a == 0)
            {
                force = v[i];
                acc += 0.5 * v[i] * W[0];
                a = 1;
            }
            for (std::size_t j = a; j < b; ++j)
                acc += v[i - j] * W[j];
        }
        W[i] = beta * (std::exp(-L) * force + dt * acc) / denom;
        I += 0.5 * dt * (W[i - 1] + W[i]);
        if (W[i] > kBig)
        {
            for (std::size_t j = 0; j <= i; ++j)
                W[j] /= kBig;
            I /= kBig;
            L += kLogBig;
        }
        out[i] = L + std::log(W[i]);
    }
    if (log_z)
        *log_z = beta > 0 ? log_plus_scaled(L, I) : 0.0;
    return out;
}

PartitionEstimate QuenchedSolver::solve(const DisorderPath& Y, std::uint64_t seed)
{
    PartitionEstimate r;
    r.seed = seed;
    r.path_hash = Y.hash();
    auto y = snap(Y, &r.grid_error_flag);
    if (spec_.beta == 0)
    {
        r.log_zc = -std::numeric_limits<double>::infinity();
        r.log_z = 0;
        return r;
    }
    auto lz = sweep(y, 0, &r.log_z);
    r.log_zc = lz.back();
    return r;
}

double QuenchedSolver::log_block_hat_Z(const DisorderPath& Y, double eta)
{
    if (!(eta > 0 && eta < 0.5))
        throw DomainError("block_hat_Z: eta must be in (0, 1/2)");
    auto y = snap(Y);
    auto m0 = std::size_t(std::llround(eta * double(n_)));
    if (n_ - m0 < 4)
        throw DomainError("block_hat_Z: grid too coarse for eta T");
    const double beta = spec_.beta, dt = spec_.delta;
    const double denom = 1 - 0.5 * dt * beta;
    if (!(denom > 0))
        throw NumericalError("block_hat_Z: delta * beta too large");
    auto runs = runs_of(y, m0);
    std::vector<double> G(n_ + 1, 0.0);
    double L = 0, I = 0;
    for (std::size_t k = m0 + 1; k <= n_; ++k)
    {
        // forcing int_{eta T}^{s} P_w(r, s) dr and history int G(u) P_w(u, s) du
        double f = 0, acc = 0;
        for (const auto& r : runs)
        {
            if (r.start >= k)
                break;
            const auto& v = lags(y[k] - r.site);
            std::size_t b = std::min(r.end, k);
            for (std::size_t j = r.start; j < b; ++j)
            {
                double wj = (j == m0) ? 0.5 : 1.0;
                f += wj * v[k - j];
                acc += wj * v[k - j] * G[j];
            }
        }
        f += 0.5;  // P_w(s, s) = 1
        G[k] = beta * (std::exp(-L) * dt * f + dt * acc) / denom;
        I += 0.5 * dt * (G[k - 1] + G[k]);
        if (G[k] > kBig)
        {
            for (std::size_t j = m0; j <= k; ++j)
                G[j] /= kBig;
            I /= kBig;
            L += kLogBig;
        }
    }
    return L + std::log(I) + std::log(spec_.engine->K(spec_.T));
}

//---------------------------------------------------------------------------//
PartitionEstimate constrained_quenched_partition(const QuenchedSolveSpec& spec,
                                                 const DisorderPath& Y)
{
    QuenchedSolver s(spec);
    return s.solve(Y);
}

std::vector<PartitionEstimate> quenched_partition_samples(const QuenchedSolveSpec& spec,
                                                          std::size_t n_samples,
                                                          std::uint64_t seed, int workers)
{
    spec.validate();
    workers = std::max(1, workers);
    std::vector<std::unique_ptr<QuenchedSolver>> solvers(workers);
    std::vector<PartitionEstimate> out(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i, int w) {
        if (!solvers[w])
            solvers[w] = std::make_unique<QuenchedSolver>(spec);
        Rng rng(task_seed(seed, i));
        auto path = spec.engine->simulate_path(spec.rho, spec.T, rng);
        out[i] = solvers[w]->solve(path, task_seed(seed, i));
    });
    return out;
}

McEstimate quenched_free_energy_estimate(const QuenchedSolveSpec& spec, std::size_t n_samples,
                                         std::uint64_t seed, int workers)
{
    if (n_samples < 2)
        throw DomainError("quenched_free_energy_estimate: need n_samples >= 2");
    auto runs = quenched_partition_samples(spec, n_samples, seed, workers);
    McEstimate est;
    for (const auto& r : runs)
        est.values.push_back(r.log_zc / spec.T);
    auto me = mean_stderr(est.values);
    est.mean = me.mean;
    est.std_err = me.std_err;
    return est;
}

std::vector<McEstimate> log_w_expectation(const QuenchedSolveSpec& spec,
                                          const std::vector<double>& t_grid,
                                          std::size_t n_samples, std::uint64_t seed,
                                          int workers)
{
    if (!spec.engine)
        throw DomainError("log_w_expectation: no transition engine");
    if (!(spec.rho >= 0 && spec.rho < 1))
        throw DomainError("log_w_expectation: rho must be in [0, 1)");
    if (t_grid.empty() || n_samples < 2)
        throw DomainError("log_w_expectation: need a t grid and n_samples >= 2");
    double tmax = *std::max_element(t_grid.begin(), t_grid.end());
    if (!(*std::min_element(t_grid.begin(), t_grid.end()) > 0))
        throw DomainError("log_w_expectation: times must be > 0");
    const auto& e = *spec.engine;
    std::vector<double> p0(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        p0[k] = e.return_prob(t_grid[k]);
    std::vector<std::vector<double>> vals(t_grid.size(), std::vector<double>(n_samples));
    parallel_for(n_samples, std::max(1, workers), [&](std::size_t i, int) {
        Rng rng(task_seed(seed, i));
        auto path = e.simulate_path(spec.rho, tmax, rng);
        for (std::size_t k = 0; k < t_grid.size(); ++k)
        {
            double p = e.transition_prob((1 - spec.rho) * t_grid[k], path.at(t_grid[k]));
            if (!(p > 0))
                throw NumericalError("log_w_expectation: w = 0 (transition probability underflow)");
            vals[k][i] = std::log(p / p0[k]);
        }
    });
    std::vector<McEstimate> out(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k)
    {
        auto me = mean_stderr(vals[k]);
        out[k].mean = me.mean;
        out[k].std_err = me.std_err;
        out[k].values = std::move(vals[k]);
    }
    return out;
}

QuenchedSolveSpec block_spec(const TransitionEngine& e, double rho, double beta, double A,
                             std::size_t steps)
{
    double F = solve_free_energy(e, beta);
    if (!(F > 0))
        throw DomainError("block_spec: needs beta > beta0");
    if (!(A > 1) || steps < 8)
        throw DomainError("block_spec: need A > 1 and at least 8 steps");
    QuenchedSolveSpec s;
    s.rho = rho;
    s.beta = beta;
    s.T = A / F;
    s.delta = s.T / double(steps);
    s.engine = &e;
    return s;
}

double block_hat_Z(const QuenchedSolveSpec& spec, const DisorderPath& Y, double eta)
{
    QuenchedSolver s(spec);
    return std::exp(s.log_block_hat_Z(Y, eta));
}

}  // namespace rwpm
