#include <cmath>

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "rwpm/rng.hpp"

using namespace rwpm;

namespace
{
struct Qag
{
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
    ~Qag() { gsl_integration_workspace_free(w); }
};

template<class F>
double integrate(F f, double a, double b)
{
    Qag q;
    gsl_function g{[](double x, void* p) { return (*static_cast<F*>(p))(x); }, &f};
    double r = 0, err = 0;
    gsl_integration_qag(&g, a, b, 0, 1e-12, 2000, GSL_INTEG_GAUSS61, q.w, &r, &err);
    return r;
}

template<class F>
double integrate_inf(F f, double a)
{
    Qag q;
    gsl_function g{[](double x, void* p) { return (*static_cast<F*>(p))(x); }, &f};
    double r = 0, err = 0;
    gsl_integration_qagiu(&g, a, 0, 1e-10, 2000, q.w, &r, &err);
    return r;
}
}  // namespace

TEST_CASE("srw transition probabilities are Bessel products")
{
    const auto& e = fx::srw(3);
    for (double t : {0.5, 2.0, 10.0, 40.0})
    {
        double i0 = gsl_sf_bessel_I0_scaled(t / 3), i1 = gsl_sf_bessel_I1_scaled(t / 3);
        CHECK(e.return_prob(t) == doctest::Approx(i0 * i0 * i0).epsilon(1e-12));
        Site y(3);
        y[0] = 1;
        CHECK(e.transition_prob(t, y) == doctest::Approx(i1 * i0 * i0).epsilon(1e-12));
    }
}

TEST_CASE("srw3 critical point matches the Watson integral")
{
    const auto& e = fx::srw(3);
    double g = integrate_inf(
        [](double t) {
            double i0 = gsl_sf_bessel_I0_scaled(t / 3);
            return i0 * i0 * i0;
        },
        0);
    CHECK(e.beta0() == doctest::Approx(1 / g).epsilon(1e-8));
    CHECK(e.beta0() == doctest::Approx(0.659463).epsilon(1e-5));
    CHECK_THROWS_AS(fx::srw(1).beta0(), RecurrentWalk);
}

TEST_CASE("stable return probability against direct Fourier quadrature")
{
    const auto& e = fx::stable(0.8);
    const auto& k = e.kernel();
    for (double t : {0.5, 1.0, 10.0, 100.0})
    {
        double want = integrate([&](double xi) { return std::exp(-t * k.char_exponent(xi)); },
                                0, kPi) /
                      kPi;
        CHECK(e.return_prob(t) == doctest::Approx(want).epsilon(1e-7));
        double y3 = integrate(
                        [&](double xi) {
                            return std::exp(-t * k.char_exponent(xi)) * std::cos(3 * xi);
                        },
                        0, kPi) /
                    kPi;
        CHECK(e.transition_prob(t, 3) == doctest::Approx(y3).epsilon(1e-6));
    }
}

TEST_CASE("K table is decreasing and interpolates")
{
    const auto& e = fx::stable(0.8);
    const auto& K = e.K_table();
    for (std::size_t i = 1; i < K.size(); ++i)
        CHECK(K[i] < K[i - 1]);
    for (double t : {0.37, 5.5, 1234.5})
        CHECK(e.K(t) == doctest::Approx(e.beta0() * e.return_prob(t)).epsilon(1e-8));
    double h = 1e-4;
    double t = 7.3;
    double num = (e.K(t * (1 + h)) - e.K(t * (1 - h))) / (2 * t * h);
    CHECK(e.K_prime(t) == doctest::Approx(num).epsilon(1e-5));
}

TEST_CASE("tail exponent of K")
{
    for (auto* e : {&fx::srw(3), &fx::stable(0.8), &fx::stable(2.0 / 3)})
    {
        double r = e->k_prime_ratio(1e5);
        CHECK(r == doctest::Approx(-(1 + e->alpha())).epsilon(0.03));
    }
}

TEST_CASE("stable law is unimodal and sums to one")
{
    const auto& e = fx::stable(0.8);
    for (double t : {1.0, 10.0, 100.0})
    {
        double s = e.transition_prob(t, 0);
        double prev = s;
        for (int y = 1; y <= 200; ++y)
        {
            double p = e.transition_prob(t, y);
            CHECK(p <= prev * (1 + 1e-9));
            prev = p;
            s += 2 * p;
        }
        CHECK(s <= 1 + 1e-8);
    }
    // most of the mass at t = 1 sits on the zero-jump atom and small sites
    double s = e.transition_prob(1, 0);
    for (int y = 1; y <= 20000; ++y)
        s += 2 * e.transition_prob(1, y);
    CHECK(s == doctest::Approx(1).epsilon(2e-3));
}

TEST_CASE("Chapman-Kolmogorov on the srw line")
{
    const auto& e = fx::srw(1);
    double s = 0.7, t = 1.9;
    for (int y : {0, 1, 4})
    {
        double c = 0;
        for (int z = -60; z <= 60; ++z)
            c += e.transition_prob(s, z) * e.transition_prob(t, y - z);
        CHECK(c == doctest::Approx(e.transition_prob(s + t, y)).epsilon(1e-12));
    }
}

TEST_CASE("transition lags match pointwise values")
{
    const auto& e = fx::stable(0.8);
    Site y = Site::axis(1, 5);
    auto lags = e.transition_lags(y, 0.25, 40);
    REQUIRE(lags.size() == 41);
    CHECK(lags[0] == 0);
    for (std::size_t k = 1; k <= 40; k += 7)
        CHECK(lags[k] == doctest::Approx(e.transition_prob(0.25 * double(k), y)).epsilon(1e-8));
}

TEST_CASE("local limit residual shrinks")
{
    const auto& e = fx::stable(0.8);
    std::vector<Site> ys;
    for (int y = 0; y <= 50; ++y)
        ys.push_back(Site::axis(1, y));
    double r2 = e.llt_residual(1e2, ys), r3 = e.llt_residual(1e3, ys);
    CHECK(r3 < r2);
    CHECK(stable_density_ratio(0.8, 0) == doctest::Approx(1));
}

TEST_CASE("disorder paths")
{
    const auto& e = fx::stable(0.8);
    Rng rng(3);
    double rho = 0.3, T = 200;
    double jumps = 0;
    for (int rep = 0; rep < 200; ++rep)
    {
        auto p = e.simulate_path(rho, T, rng);
        jumps += double(p.jumps());
        for (std::size_t i = 0; i < p.jumps(); ++i)
        {
            CHECK(p.times[i] > (i ? p.times[i - 1] : 0.0));
            CHECK(p.times[i] <= T);
            Site prev = i ? p.positions[i - 1] : p.origin();
            CHECK_FALSE(p.positions[i] == prev);
        }
    }
    // nonzero jumps only: rate rho (1 - J(0))
    double want = 200 * rho * T * (1 - e.kernel().prob(0));
    CHECK(std::fabs(jumps - want) < 5 * std::sqrt(want));

    auto p = e.simulate_path(rho, 20, rng);
    auto q = DisorderPath::from_text(p.to_text(3));
    CHECK(q.times == p.times);
    CHECK(q.positions == p.positions);
    CHECK(q.hash() == p.hash());
    CHECK(e.simulate_path(0, 50, rng).jumps() == 0);
    if (p.jumps())
    {
        CHECK(p.at(p.times[0]) == p.positions[0]);
        CHECK(p.at(p.times[0] * 0.5).is_origin());
    }
}
