#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "rwpm/homogeneous.hpp"

using namespace rwpm;

TEST_CASE("free energy solves the Laplace equation")
{
    const auto& e = fx::srw(3);
    double b0 = e.beta0();
    CHECK(solve_free_energy(e, b0) == 0);
    CHECK(solve_free_energy(e, 0.5 * b0) == 0);
    double prev = 0;
    for (double f : {1.05, 1.1, 1.3, 1.6, 2.0, 3.0})
    {
        double beta = f * b0;
        double F = solve_free_energy(e, beta);
        CHECK(F > prev);
        CHECK(beta * e.laplace(F) == doctest::Approx(1).epsilon(1e-9));
        prev = F;
    }
    // secant slopes increase
    std::vector<double> b{1.2, 1.4, 1.6, 1.8, 2.0};
    std::vector<double> F;
    for (double x : b)
        F.push_back(solve_free_energy(e, x * b0));
    for (std::size_t i = 2; i < b.size(); ++i)
        CHECK(F[i] - F[i - 1] >= F[i - 1] - F[i - 2]);
}

TEST_CASE("table normalization and derivative")
{
    for (auto* e : {&fx::srw(3), &fx::stable(0.8)})
    {
        double beta = 1.2 * e->beta0();
        FreeEnergyTable tab(*e, beta);
        CHECK(tab.mass_time_domain() == doctest::Approx(1).epsilon(1e-6));
        CHECK(tab.mean_time_domain() == doctest::Approx(tab.mean_gap()).epsilon(1e-5));
        CHECK(tab.K_beta_bar(0) == doctest::Approx(1).epsilon(1e-6));
        double h = 1e-5 * beta;
        double num = (solve_free_energy(*e, beta + h) - solve_free_energy(*e, beta - h)) / (2 * h);
        CHECK(tab.F_prime() == doctest::Approx(num).epsilon(1e-5));
        CHECK(tab.K_beta(3.0) ==
              doctest::Approx(beta * std::exp(-tab.F() * 3) * e->return_prob(3)).epsilon(1e-8));
    }
}

TEST_CASE("at the critical point the gap law is proper with infinite mean")
{
    const auto& e = fx::stable(0.8);
    FreeEnergyTable tab(e, e.beta0());
    CHECK(tab.F() == 0);
    CHECK(std::isinf(tab.mean_gap()));
    CHECK(tab.K_beta_bar(0) == doctest::Approx(1).epsilon(1e-6));
}

TEST_CASE("critical exponent fits")
{
    const auto& e = fx::srw(3);
    auto fit = critical_exponent_fit(e, beta_grid_near_critical(e, 1e-4, 1e-2, 8));
    CHECK(fit.nu == doctest::Approx(2).epsilon(0.08));
    CHECK(fit.r2 > 0.99);
    const auto& r = fx::stable(1.5);
    auto g = beta_grid_near_critical(r, 1e-3, 1e-1, 5);
    CHECK(g.front() == doctest::Approx(1e-3));
}

TEST_CASE("Doney renewal asymptotics")
{
    const auto& e = fx::stable(2.0 / 3);
    double t = 1e3, delta = 0.01;
    auto u = renewal_density(e, e.beta0(), t, delta);
    double a = e.alpha();
    double s = u.back() * t * t * e.K(t);
    CHECK(s == doctest::Approx(a * std::sin(kPi * a) / kPi).epsilon(0.05));
    CHECK_THROWS_AS(renewal_density(e, e.beta0(), 10, 1.0), DomainError);
}

TEST_CASE("annealed partition functions agree")
{
    const auto& e = fx::srw(3);
    double beta = 1.3 * e.beta0(), T = 20, delta = 0.01;
    FreeEnergyTable tab(e, beta);
    tab.solve_renewal(T, delta);
    auto zc = constrained_annealed_direct(e, beta, T, delta);
    CHECK(constrained_annealed_partition(tab, T) == doctest::Approx(zc.back()).epsilon(1e-8));
    auto z = free_annealed_partition(e, beta, T, delta);
    CHECK(free_from_constrained(zc, delta) == doctest::Approx(z.back()).epsilon(1e-4));
    CHECK(zc.front() == doctest::Approx(beta));
    // growth rate
    double rate = (std::log(zc.back()) - std::log(zc[zc.size() / 2])) / (T / 2);
    CHECK(rate == doctest::Approx(tab.F()).epsilon(0.05));
}

TEST_CASE("F' against u(1/F) stays bounded")
{
    const auto& e = fx::srw(3);
    double lo = 1e300, hi = 0;
    for (double f : {1.02, 1.05, 1.1, 1.3, 2.0})
    {
        FreeEnergyTable tab(e, f * e.beta0());
        double t = 1 / tab.F();
        tab.solve_renewal(1.01 * t, default_delta(tab.F()));
        double r = tab.F_prime() / tab.u(t);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo < 3);
}

TEST_CASE("sandwich ratios")
{
    const auto& e = fx::stable(0.8);
    FreeEnergyTable tab(e, 1.1 * e.beta0());
    double tmax = 5 / tab.F();
    tab.solve_renewal(tmax, default_delta(tab.F()));
    std::vector<double> ts;
    for (double t = 1; t < tmax; t *= 1.5)
        ts.push_back(t);
    auto s = sandwich_check(tab, ts, 0.1);
    CHECK(s.min_ratio > 0.05);
    CHECK(s.max_ratio < 20);
    CHECK(s.near_min > 0.5);
    CHECK(s.near_max < 5);
}
