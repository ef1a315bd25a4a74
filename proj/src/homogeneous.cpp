#include "rwpm/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwpm/quadrature.hpp"
#include "rwpm/volterra.hpp"

namespace rwpm
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

double beta0_or_zero(const TransitionEngine& e)
{
    return e.transient() ? e.beta0() : 0.0;
}

std::vector<double> kernel_on_grid(const TransitionEngine& e, double beta, double F,
                                   std::size_t n, double delta)
{
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double t = double(i) * delta;
        k[i] = beta * std::exp(-F * t) * e.return_prob(t);
    }
    return k;
}

std::size_t grid_size(double t_end, double delta)
{
    if (!(delta > 0) || !(t_end >= 0))
        throw DomainError("renewal grid: need delta > 0 and t_end >= 0");
    double n = std::round(t_end / delta);
    if (n > 5e8)
        throw DomainError("renewal grid: too many points");
    return std::size_t(n) + 1;
}
}  // namespace

//---------------------------------------------------------------------------//
double solve_free_energy(const TransitionEngine& e, double beta)
{
    if (!(beta >= 0))
        throw DomainError("solve_free_energy: beta must be >= 0");
    double b0 = beta0_or_zero(e);
    if (beta <= b0 || beta == 0)
        return 0.0;
    auto g = [&](double b) { return beta * e.laplace(b) - 1; };

    // g decreases in b, g(beta) < 0 because P(W_t = 0) < 1 for t > 0
    double hi = beta, lo = beta * 1e-3;
    if (!(g(hi) < 0))
        throw NumericalError("solve_free_energy: bracket check failed at b = beta");
    while (!(g(lo) > 0))
    {
        hi = lo;
        lo *= 1e-3;
        if (lo < 1e-280)
            throw NumericalError("solve_free_energy: root below resolution");
    }
    // safeguarded Newton, bisection in log b
    double b = std::sqrt(lo * hi);
    for (int it = 0; it < 300; ++it)
    {
        double v = g(b);
        if (v > 0)
            lo = b;
        else
            hi = b;
        double d = -beta * e.laplace_moment(b);
        double nb = b - v / d;
        if (!(nb > lo && nb < hi) || !std::isfinite(nb))
            nb = std::sqrt(lo * hi);
        if (std::abs(nb - b) <= 1e-14 * b || hi / lo - 1 < 1e-14)
            return nb;
        b = nb;
    }
    throw NumericalError("solve_free_energy: no convergence");
}

std::vector<double> beta_grid_near_critical(const TransitionEngine& e, double lo, double hi,
                                            int n)
{
    if (!(lo > 0 && hi > lo && n >= 2))
        throw DomainError("beta grid: need 0 < lo < hi and n >= 2");
    double b0 = beta0_or_zero(e);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
    {
        double x = lo * std::pow(hi / lo, double(i) / (n - 1));
        // recurrent: beta0 = 0 and x is beta itself
        out[i] = b0 > 0 ? b0 * (1 + x) : x;
    }
    return out;
}

ExponentFit critical_exponent_fit(const TransitionEngine& e, const std::vector<double>& betas)
{
    if (betas.size() < 8)
        throw DomainError("critical_exponent_fit: need at least 8 beta values");
    double b0 = beta0_or_zero(e);
    ExponentFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (double b : betas)
    {
        if (!(b > b0))
            throw DomainError("critical_exponent_fit: beta grid must lie above beta0");
        double F = solve_free_energy(e, b);
        if (!(F > 0))
            throw NumericalError("critical_exponent_fit: F = 0 on the grid (below resolution)");
        fit.dbeta.push_back(b - b0);
        fit.F.push_back(F);
        double x = std::log(b - b0), y = std::log(F);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double n = double(betas.size());
    double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
    fit.nu = cxy / cxx;
    fit.log_prefactor = (sy - fit.nu * sx) / n;
    fit.r2 = cyy > 0 ? cxy * cxy / (cxx * cyy) : 1.0;
    return fit;
}

//---------------------------------------------------------------------------//
FreeEnergyTable::FreeEnergyTable(const TransitionEngine& e, double beta) : e_(&e), beta_(beta)
{
    if (!(beta > 0))
        throw DomainError("FreeEnergyTable: beta must be > 0");
    double b0 = beta0_or_zero(e);
    if (beta < b0)
        throw DomainError("FreeEnergyTable: beta below beta0 (K_beta is not a density)");
    F_ = solve_free_energy(e, beta);
    mean_ = beta * e.laplace_moment(F_);
    F_prime_ = std::isfinite(mean_) ? 1 / (beta * mean_) : 0.0;

    const auto& g = e.time_grid();
    double T = g.back();
    p_end_ = e.return_prob(T);
    tail_sigma_ = e.k_prime_ratio(T);

    std::size_t n = g.size();
    bar_.assign(n, 0.0);
    bar1_.assign(n, 0.0);
    bar_[n - 1] = tail_integral(T, 0);
    bar1_[n - 1] = tail_integral(T, 1);
    const GaussRule& r = gauss_legendre(8);
    for (std::size_t i = n - 1; i-- > 0;)
    {
        double a = g[i], b = g[i + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
        double s0 = 0, s1 = 0;
        for (std::size_t j = 0; j < r.x.size(); ++j)
        {
            double t = m + h * r.x[j];
            double k = K_beta(t) * r.w[j] * h;
            s0 += k;
            s1 += k * t;
        }
        bar_[i] = bar_[i + 1] + s0;
        bar1_[i] = bar1_[i + 1] + s1;
    }
    mass_td_ = head_integral(0) + bar_[0];
    mean_td_ = head_integral(1) + bar1_[0];
}

double FreeEnergyTable::K_beta(double t) const
{
    if (!(t >= 0))
        throw DomainError("K_beta: t must be >= 0");
    return beta_ * std::exp(-F_ * t) * e_->return_prob(t);
}

double FreeEnergyTable::head_integral(int moment) const
{
    double t0 = grid().front();
    auto f = [&](double t) { return K_beta(t) * (moment ? t : 1.0); };
    return gauss_composite(f, 0.0, t0, 2, 16);
}

double FreeEnergyTable::tail_integral(double t, int moment) const
{
    double T = grid().back();
    double c = beta_ * p_end_ * std::pow(T, -tail_sigma_);
    return c * power_exp_tail(-(tail_sigma_ + moment), F_, t);
}

double FreeEnergyTable::K_beta_bar(double t) const
{
    const auto& g = grid();
    if (!(t >= 0))
        throw DomainError("K_beta_bar: t must be >= 0");
    if (t >= g.back())
        return tail_integral(t, 0);
    auto f = [&](double s) { return K_beta(s); };
    if (t < g.front())
        return bar_[0] + gauss_panel(f, t, g.front(), 16);
    auto i = std::size_t(std::upper_bound(g.begin(), g.end(), t) - g.begin()) - 1;
    return bar_[i] - gauss_panel(f, g[i], t, 16);
}

double FreeEnergyTable::K_beta_bar_moment(double t) const
{
    const auto& g = grid();
    if (!(t >= 0))
        throw DomainError("K_beta_bar_moment: t must be >= 0");
    if (t >= g.back())
        return tail_integral(t, 1);
    auto f = [&](double s) { return s * K_beta(s); };
    if (t < g.front())
        return bar1_[0] + gauss_panel(f, t, g.front(), 16);
    auto i = std::size_t(std::upper_bound(g.begin(), g.end(), t) - g.begin()) - 1;
    return bar1_[i] - gauss_panel(f, g[i], t, 16);
}

void FreeEnergyTable::solve_renewal(double t_end, double delta)
{
    u_.clear();
    if (e_->transient())
        u_ = renewal_density(*e_, e_->beta0(), t_end, delta);
    u_beta_ = renewal_density(*e_, beta_, t_end, delta);
    delta_ = delta;
}

namespace
{
double interp_uniform(const std::vector<double>& v, double delta, double t)
{
    double x = t / delta;
    auto i = std::size_t(std::floor(x));
    if (i + 1 >= v.size())
        return v.back();
    double s = x - double(i);
    return v[i] * (1 - s) + v[i + 1] * s;
}
}  // namespace

double FreeEnergyTable::u(double t) const
{
    if (u_.empty())
        throw DomainError("u: renewal density not solved (call solve_renewal)");
    if (!(t >= 0) || t > delta_ * double(u_.size() - 1) * (1 + 1e-12))
        throw DomainError("u: t outside the solved grid");
    return interp_uniform(u_, delta_, t);
}

double FreeEnergyTable::u_beta(double t) const
{
    if (u_beta_.empty())
        throw DomainError("u_beta: renewal density not solved (call solve_renewal)");
    if (!(t >= 0))
        throw DomainError("u_beta: t must be >= 0");
    if (t > delta_ * double(u_beta_.size() - 1) * (1 + 1e-12))
    {
        double lim = intensity();
        if (lim > 0 && std::abs(u_beta_.back() / lim - 1) < 0.01)
            return lim;
        throw DomainError("u_beta: t beyond the solved grid and u_beta has not settled");
    }
    return interp_uniform(u_beta_, delta_, t);
}

//---------------------------------------------------------------------------//
double default_delta(double F)
{
    return F > 0 ? std::min(0.01, 0.01 / F) : 0.01;
}

std::vector<double> renewal_density(const TransitionEngine& e, double beta, double t_end,
                                    double delta)
{
    std::size_t n = grid_size(t_end, delta);
    double F = solve_free_energy(e, beta);
    auto k = kernel_on_grid(e, beta, F, std::max<std::size_t>(n, 2), delta);
    double change = std::abs(k[1] / k[0] - 1);
    if (change > 0.2)
    {
        std::ostringstream msg;
        msg << "renewal_density: delta = " << delta << " too coarse (K_beta changes by "
            << change * 100 << "% over the first step); try delta <= " << delta * 0.1 / change;
        throw DomainError(msg.str());
    }
    k.resize(n);
    return volterra_convolution(k, k, delta);
}

double constrained_annealed_partition(const FreeEnergyTable& tab, double T)
{
    if (!(T >= 0))
        throw DomainError("constrained_annealed_partition: T must be >= 0");
    return tab.u_beta(T) * std::exp(tab.F() * T);
}

std::vector<double> constrained_annealed_direct(const TransitionEngine& e, double beta,
                                                double T, double delta)
{
    std::size_t n = grid_size(T, delta);
    auto k = kernel_on_grid(e, beta, 0.0, n, delta);
    return volterra_convolution(k, k, delta);
}

std::vector<double> free_annealed_partition(const TransitionEngine& e, double beta, double T,
                                            double delta)
{
    std::size_t n = grid_size(T, delta);
    auto k = kernel_on_grid(e, beta, 0.0, n, delta);
    std::vector<double> one(n, 1.0);
    return volterra_convolution(one, k, delta);
}

double free_from_constrained(const std::vector<double>& zc, double delta)
{
    if (zc.empty())
        throw DomainError("free_from_constrained: empty grid");
    double s = 0;
    for (std::size_t i = 1; i < zc.size(); ++i)
        s += 0.5 * (zc[i - 1] + zc[i]);
    return 1 + s * delta;
}

SandwichResult sandwich_check(const FreeEnergyTable& tab, const std::vector<double>& t_grid,
                              double eta)
{
    if (!tab.has_renewal())
        throw DomainError("sandwich_check: call solve_renewal first");
    if (!(eta > 0))
        throw DomainError("sandwich_check: eta must be > 0");
    SandwichResult r;
    r.eta = eta;
    r.min_ratio = r.near_min = kInf;
    r.max_ratio = r.near_max = -kInf;
    double F = tab.F();
    double corr = F > 0 ? 1 / F : kInf;
    for (double t : t_grid)
    {
        if (!(t > 0))
            continue;
        double ub = tab.u_beta(t);
        double ratio = ub / tab.u(std::min(t, corr));
        r.min_ratio = std::min(r.min_ratio, ratio);
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (F == 0 || t <= eta / F)
        {
            double near = ub / tab.u(t);
            r.near_min = std::min(r.near_min, near);
            r.near_max = std::max(r.near_max, near);
        }
    }
    if (!std::isfinite(r.min_ratio))
        throw DomainError("sandwich_check: empty time grid");
    return r;
}

}  // namespace rwpm
