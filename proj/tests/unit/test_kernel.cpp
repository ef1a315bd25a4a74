#include <cmath>

#include "doctest.h"
#include "rwpm/kernel.hpp"
#include "rwpm/rng.hpp"

using namespace rwpm;

TEST_CASE("srw kernel weights")
{
    auto k1 = make_srw_kernel(1);
    CHECK(k1.prob(1) == doctest::Approx(0.5));
    CHECK(k1.prob(-1) == doctest::Approx(0.5));
    CHECK(k1.prob(0) == 0);
    CHECK(k1.prob(2) == 0);
    auto k3 = make_srw_kernel(3);
    Site e2(3);
    e2[1] = -1;
    CHECK(k3.prob(e2) == doctest::Approx(1.0 / 6));
    CHECK(k3.alpha() == doctest::Approx(0.5));
    CHECK(k3.transient());
    CHECK_FALSE(make_srw_kernel(2).transient());
    CHECK_THROWS_AS(make_srw_kernel(0), DomainError);
}

TEST_CASE("srw characteristic exponent")
{
    auto k = make_srw_kernel(3);
    std::vector<double> xi{0.3, -1.1, 2.5};
    double want = 1 - (std::cos(0.3) + std::cos(1.1) + std::cos(2.5)) / 3;
    CHECK(k.char_exponent(xi) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("stable kernel shape")
{
    auto k = make_stable_kernel(0.8);
    CHECK(k.normalization_residual() < 1e-10);
    CHECK(k.prob(0) / k.prob(1) == doctest::Approx(std::pow(2.0, 1.8)).epsilon(1e-12));
    for (int x = 1; x <= 50; ++x)
    {
        CHECK(k.prob(x) == k.prob(-x));
        CHECK(k.prob(x) < k.prob(x - 1));
    }
    CHECK(k.alpha() == doctest::Approx(0.25));
    CHECK(k.transient());
    CHECK_FALSE(make_stable_kernel(1.5).transient());
    CHECK_THROWS_AS(make_stable_kernel(2.5), DomainError);
    CHECK_THROWS_AS(make_stable_kernel(0.0), DomainError);
    CHECK_THROWS_AS(make_stable_kernel(0.8, PhiSpec::constant(), 0), DomainError);
}

TEST_CASE("stable q against a direct lattice sum")
{
    auto k = make_stable_kernel(0.8);
    const std::int64_t N = 200000;
    double slack = 2 * k.tail_mass(N) + 1e-12;
    for (double xi : {0.01, 0.2, 1.0, 2.0, 3.1})
    {
        double s = 0;
        for (std::int64_t x = N; x >= 1; --x)
            s += k.prob(x) * (1 - std::cos(xi * double(x)));
        s *= 2;
        double q = k.char_exponent(xi);
        CHECK(q >= s - 1e-12);
        CHECK(q <= s + slack);
        CHECK(q == doctest::Approx(k.char_exponent(-xi)));
        CHECK(q > 0);
        CHECK(q <= 2);
    }
    CHECK(k.char_exponent(0.0) == 0);
}

TEST_CASE("stable q small-xi asymptotics")
{
    double g = 0.8;
    auto k = make_stable_kernel(g);
    double xi = 1e-5;
    double want = k.normalization() * stable_constant(g) * std::pow(xi, g);
    CHECK(k.char_exponent(xi) / want == doctest::Approx(1).epsilon(0.01));
}

TEST_CASE("log-power slowly varying factor")
{
    auto phi = PhiSpec::log_power(1.5);
    CHECK(phi(0) == doctest::Approx(1));
    CHECK(phi(1e12) / phi(2e12) > phi(1e3) / phi(2e3));
    CHECK(phi(1e12) / phi(2e12) < 1);
    auto k = make_stable_kernel(0.8, phi);
    CHECK(k.normalization_residual() < 1e-10);
    CHECK(k.prob(10) / k.prob(0) ==
          doctest::Approx(phi(10) / std::pow(11.0, 1.8)).epsilon(1e-12));
}

TEST_CASE("stable jump sampler frequencies")
{
    auto k = make_stable_kernel(0.8);
    Rng rng(7);
    const int n = 200000;
    std::vector<int> hist(4, 0);
    int big = 0;
    for (int i = 0; i < n; ++i)
    {
        auto x = std::llabs(k.sample_jump(rng)[0]);
        if (x < 4)
            ++hist[x];
        if (x > 10)
            ++big;
    }
    auto within = [&](int count, double p) {
        double sd = std::sqrt(n * p * (1 - p));
        return std::fabs(count - n * p) < 5 * sd;
    };
    CHECK(within(hist[0], k.prob(0)));
    for (int x = 1; x < 4; ++x)
        CHECK(within(hist[x], 2 * k.prob(x)));
    CHECK(within(big, k.tail_mass(10)));
    for (int i = 0; i < 1000; ++i)
        CHECK_FALSE(k.sample_nonzero_jump(rng).is_origin());
}
