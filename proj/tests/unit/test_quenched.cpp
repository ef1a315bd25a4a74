#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "rwpm/homogeneous.hpp"
#include "rwpm/quenched.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/stats.hpp"

using namespace rwpm;

namespace
{
QuenchedSolveSpec spec_for(const TransitionEngine& e, double rho, double beta, double T,
                           double delta)
{
    QuenchedSolveSpec s;
    s.rho = rho;
    s.beta = beta;
    s.T = T;
    s.delta = delta;
    s.engine = &e;
    return s;
}
}  // namespace

TEST_CASE("no disorder reduces to the annealed model")
{
    const auto& e = fx::srw(3);
    double beta = 1.4 * e.beta0(), T = 10, delta = 0.01;
    auto sp = spec_for(e, 0, beta, T, delta);
    Rng rng(1);
    auto Y = e.simulate_path(0, T, rng);
    auto r = constrained_quenched_partition(sp, Y);
    auto zc = constrained_annealed_direct(e, beta, T, delta);
    CHECK(r.log_zc == doctest::Approx(std::log(zc.back())).epsilon(1e-10));
    auto z = free_annealed_partition(e, beta, T, delta);
    CHECK(r.log_z == doctest::Approx(std::log(z.back())).epsilon(1e-4));
    CHECK_FALSE(r.grid_error_flag);
    CHECK(w_weight(sp, 1, 4, Y) == doctest::Approx(1));
    CHECK(kw(sp, 1, 4, Y) == doctest::Approx(e.K(3)));

    auto est = quenched_free_energy_estimate(sp, 5, 3);
    CHECK(est.std_err == 0);
    CHECK(est.mean == doctest::Approx(std::log(zc.back()) / T).epsilon(1e-10));
}

TEST_CASE("zero coupling")
{
    const auto& e = fx::stable(0.8);
    auto sp = spec_for(e, 0.3, 0, 5, 0.05);
    Rng rng(2);
    auto r = constrained_quenched_partition(sp, e.simulate_path(0.3, 5, rng));
    CHECK(r.log_z == 0);
    CHECK(std::isinf(r.log_zc));
    CHECK(r.log_zc < 0);
}

TEST_CASE("spec validation")
{
    const auto& e = fx::srw(3);
    CHECK_THROWS_AS(spec_for(e, 0.1, 1, 1, 0.3).validate(), DomainError);
    CHECK_THROWS_AS(spec_for(e, 1.0, 1, 1, 0.1).validate(), DomainError);
    CHECK_THROWS_AS(spec_for(e, 0.1, -1, 1, 0.1).validate(), DomainError);
    QuenchedSolveSpec none;
    CHECK_THROWS_AS(none.validate(), DomainError);
    CHECK(spec_for(e, 0.1, 1, 1, 0.1).steps() == 10);
}

TEST_CASE("snapping flags two jumps in one cell")
{
    const auto& e = fx::stable(0.8);
    auto sp = spec_for(e, 0.3, e.beta0(), 1, 0.01);
    DisorderPath Y;
    Y.rate = 0.3;
    Y.horizon = 1;
    Y.times = {0.1001, 0.1002, 0.5};
    Y.positions = {Site::axis(1, 1), Site::axis(1, 3), Site::axis(1, -2)};
    QuenchedSolver s(sp);
    bool hit = false;
    auto y = s.snap(Y, &hit);
    CHECK(hit);
    REQUIRE(y.size() == 101);
    CHECK(y[0].is_origin());
    CHECK(y[9].is_origin());
    CHECK(y[10] == Site::axis(1, 3));
    CHECK(y[50] == Site::axis(1, -2));
    Y.times = {0.1001, 0.3, 0.5};
    s.snap(Y, &hit);
    CHECK_FALSE(hit);
}

TEST_CASE("lag cache")
{
    const auto& e = fx::stable(0.8);
    auto sp = spec_for(e, 0.3, e.beta0(), 2, 0.1);
    QuenchedSolver s(sp, 4);
    auto a = s.lags(Site::axis(1, 1));
    for (int d = 2; d <= 4; ++d)
        s.lags(Site::axis(1, d));
    s.lags(Site::axis(1, 1));
    CHECK(s.cache_misses() == 4);
    // 2 is now the oldest entry
    s.lags(Site::axis(1, 5));
    s.lags(Site::axis(1, 1));
    CHECK(s.cache_misses() == 5);
    s.lags(Site::axis(1, 2));
    CHECK(s.cache_misses() == 6);
    // X runs at rate 1 - rho
    CHECK(a == e.transition_lags(Site::axis(1, 1), 0.7 * 0.1, 20));
}

namespace
{
// K(T) times the double trapezoid over eta T < r < s < T of per-endpoint sweeps
double block_by_sweeps(QuenchedSolver& s, const DisorderPath& Y, double eta)
{
    const auto& sp = s.spec();
    auto y = s.snap(Y);
    std::size_t n = sp.steps(), m0 = std::size_t(std::llround(eta * double(n)));
    double dt = sp.delta;
    std::vector<std::vector<double>> z(n + 1);
    for (std::size_t r = m0; r <= n; ++r)
    {
        double lz = 0;
        for (double x : s.sweep(y, r, &lz))
            z[r].push_back(std::exp(x));
    }
    std::vector<double> G(n + 1, 0.0);
    for (std::size_t k = m0 + 1; k <= n; ++k)
    {
        double g = 0;
        for (std::size_t r = m0; r <= k; ++r)
            g += ((r == m0 || r == k) ? 0.5 : 1.0) * z[r][k - r];
        G[k] = dt * g;
    }
    double I = 0;
    for (std::size_t k = m0 + 1; k <= n; ++k)
        I += 0.5 * dt * (G[k - 1] + G[k]);
    return std::log(I * sp.engine->K(sp.T));
}
}  // namespace

TEST_CASE("block partition function from per-endpoint sweeps")
{
    const auto& e = fx::stable(0.8);
    double beta = 1.2 * e.beta0();
    double diff[2];
    int i = 0;
    for (std::size_t steps : {200ul, 400ul})
    {
        auto sp = block_spec(e, 0.3, beta, 2, steps);
        Rng rng(12);
        auto Y = e.simulate_path(0.3, sp.T, rng);
        QuenchedSolver s(sp);
        double got = s.log_block_hat_Z(Y, 0.25);
        diff[i++] = std::fabs(got - block_by_sweeps(s, Y, 0.25));
        CHECK(s.log_block_hat_Z(Y, 0.4) < got);
        CHECK_THROWS_AS(s.log_block_hat_Z(Y, 0.5), DomainError);
    }
    // same continuum limit; the summation orders differ at second order in delta
    CHECK(diff[1] < 0.05);
    CHECK(diff[0] / diff[1] > 3);
    CHECK(diff[0] / diff[1] < 5.5);
}

TEST_CASE("first moment of w is one")
{
    const auto& e = fx::stable(0.8);
    auto sp = spec_for(e, 0.3, e.beta0(), 10, 0.01);
    auto r = log_w_expectation(sp, {1, 10}, 20000, 5, 1);
    REQUIRE(r.size() == 2);
    for (const auto& m : r)
    {
        std::vector<double> w;
        for (double v : m.values)
            w.push_back(std::exp(v));
        auto me = mean_stderr(w);
        CHECK(std::fabs(me.mean - 1) < 4 * me.std_err);
        CHECK(m.mean < 0);
    }
}

TEST_CASE("samples are reproducible and independent of the worker count")
{
    const auto& e = fx::stable(0.8);
    auto sp = spec_for(e, 0.2, 1.2 * e.beta0(), 4, 0.02);
    auto a = quenched_partition_samples(sp, 12, 77, 1);
    auto b = quenched_partition_samples(sp, 12, 77, 3);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].log_zc == b[i].log_zc);
        CHECK(a[i].path_hash == b[i].path_hash);
    }
    auto c = quenched_partition_samples(sp, 12, 78, 1);
    CHECK(c[0].log_zc != a[0].log_zc);
}

TEST_CASE("disorder lowers the free energy")
{
    const auto& e = fx::stable(0.8);
    double beta = 1.2 * e.beta0();
    auto lo = quenched_free_energy_estimate(spec_for(e, 0.1, beta, 20, 0.05), 200, 5, 1);
    auto hi = quenched_free_energy_estimate(spec_for(e, 0.3, beta, 20, 0.05), 200, 5, 1);
    CHECK(hi.mean < lo.mean);
    FreeEnergyTable tab(e, beta);
    CHECK(lo.mean < tab.F());
}

TEST_CASE("constrained partition functions are supermultiplicative")
{
    const auto& e = fx::stable(0.8);
    double beta = 1.2 * e.beta0();
    auto sp = spec_for(e, 0.3, beta, 20, 0.02);
    QuenchedSolver s(sp);
    Rng rng(31);
    for (int rep = 0; rep < 5; ++rep)
    {
        auto y = s.snap(e.simulate_path(0.3, sp.T, rng));
        double lz = 0;
        auto whole = s.sweep(y, 0, &lz);
        for (std::size_t k : {100ul, 500ul, 900ul})
        {
            auto tail = s.sweep(y, k, &lz);
            CHECK(whole.back() >= whole[k] + tail.back() - std::log(beta));
        }
    }
}

TEST_CASE("delta refinement converges at first order")
{
    const auto& e = fx::stable(0.8);
    double beta = 1.2 * e.beta0(), T = 4;
    // jumps on a coarse lattice of times so every grid resolves them exactly
    DisorderPath Y;
    Y.rate = 0.3;
    Y.horizon = T;
    Y.times = {0.5, 1.25, 2.75};
    Y.positions = {Site::axis(1, 2), Site::axis(1, -1), Site::axis(1, 0)};
    std::vector<double> v;
    for (double d : {0.05, 0.025, 0.0125, 0.00625})
        v.push_back(constrained_quenched_partition(spec_for(e, 0.3, beta, T, d), Y).log_zc);
    // rectangle rule on the lag grid: error halves with delta
    for (std::size_t i = 0; i + 2 < v.size(); ++i)
    {
        double r = (v[i] - v[i + 1]) / (v[i + 1] - v[i + 2]);
        CHECK(r > 1.6);
        CHECK(r < 2.4);
    }
    CHECK(std::abs(v[2] - v[3]) < 1e-3);
}
