#include "rwpm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "jet.hpp"
#include "rwpm/quadrature.hpp"

namespace rwpm
{
namespace
{
using detail::Jet;

constexpr double kE = 2.71828182845904523536;
// Terms summed directly in q(xi); the rest is handled analytically.
constexpr int kDirect = 2048;
// Power moments used when kDirect * xi is small.
constexpr int kMoments = 12;
// Oscillation cutoff (x = xi r) beyond which integration by parts is used.
constexpr double kOscCut = 64 * kPi;

// log(e + r) without overflow for huge r given log(1 + r).
double log_e_plus(double log1p_r)
{
    return log1p_r + std::log1p((kE - 1) * std::exp(-log1p_r));
}

}  // namespace

//---------------------------------------------------------------------------//
struct JumpKernel::Table
{
    std::vector<double> f;     // profile f(n), n <= kDirect
    std::vector<double> cdf;   // P(|X| <= n), n <= R
    std::vector<double> mom;   // sum_{n<=kDirect} f(n) n^{2k}
    double tail_direct = 0;    // sum_{n>kDirect} f(n)
    double tail_beyond_r = 0;  // sum_{n>R} f(n)
};

double PhiSpec::operator()(double r) const
{
    if (family == Family::constant || kappa == 0)
        return 1.0;
    return std::pow(std::log(kE + r), kappa);
}

double stable_constant(double gamma)
{
    if (!(gamma > 0 && gamma < 2))
        throw DomainError("stable_constant: gamma must lie in (0, 2)");
    if (gamma == 1)
        return kPi;
    return 2 * std::tgamma(1 - gamma) * std::cos(kPi * gamma / 2) / gamma;
}

double JumpKernel::alpha() const
{
    if (is_srw())
        return dim_ / 2.0 - 1;
    return (1 - gamma_) / gamma_;
}

bool JumpKernel::transient() const
{
    return is_srw() ? dim_ >= 3 : gamma_ < 1;
}

double JumpKernel::profile(double r) const
{
    double v = std::pow(1 + r, -(1 + gamma_));
    if (phi_.exponent() != 0)
        v *= std::pow(std::log(kE + r), phi_.kappa);
    return v;
}

namespace
{
template<int N>
Jet<N> profile_jet(double r0, double gamma, double kappa)
{
    auto x = Jet<N>::variable(r0);
    auto p = pow(1.0 + x, -(1 + gamma));
    if (kappa != 0)
        p = p * exp(kappa * log(log(kE + x)));
    return p;
}

// Midpoint Euler-Maclaurin correction for sum_{n>N} g(n) - int_{N+1/2}^inf g.
template<int N>
double em_correction(const Jet<N>& g)
{
    static_assert(N >= 6);
    return g.deriv(1) / 24 - 7 * g.deriv(3) / 5760 + 31 * g.deriv(5) / 967680;
}

// Re int_{r0}^inf f(r) e^{i xi r} dr by repeated integration by parts.
// Derivatives are taken in the scaled variable r = r0 (1 + e) to stay in range.
double cos_tail_ibp(double r0, double xi, double gamma, double kappa)
{
    constexpr int M = 14;
    auto x = Jet<M>::variable(r0);
    x.a[1] = r0;
    auto f = pow(1.0 + x, -(1 + gamma));
    if (kappa != 0)
        f = f * exp(kappa * log(log(kE + x)));
    std::complex<double> inv(0, -1 / (xi * r0)), acc(0, 0), p = 1.0;
    for (int k = 0; k < M; ++k)
    {
        double sgn = (k % 2 == 0) ? 1 : -1;
        acc += sgn * f.deriv(k) * p;
        p *= inv;
    }
    return std::real(-std::polar(1.0, xi * r0) * acc / std::complex<double>(0, xi));
}
}  // namespace

double JumpKernel::profile_tail_integral(double r0) const
{
    double v0 = std::pow(1 + r0, -gamma_) / gamma_;
    if (phi_.exponent() == 0)
        return v0;
    // substitution v = (1+r)^{-gamma}/gamma, v = v0 e^{-s}
    double l0 = std::log1p(r0), kappa = phi_.kappa, g = gamma_;
    auto integrand = [&](double s) {
        return std::exp(-s) * std::pow(log_e_plus(l0 + s / g), kappa);
    };
    return v0 * gauss_composite(integrand, 0.0, 48.0, 32, 10);
}

double JumpKernel::tail_mass(std::int64_t n) const
{
    if (is_srw())
        return n >= 1 ? 0.0 : 1.0;
    if (n < 0)
        return 1.0;
    if (n <= radius_)
        return std::max(0.0, 1.0 - table_->cdf[n]);
    auto a = double(n) + 0.5;
    auto f = profile_jet<8>(a, gamma_, phi_.exponent());
    return 2 * c_ * (profile_tail_integral(a) + em_correction(f));
}

double JumpKernel::prob(const Site& x) const
{
    if (x.dim != dim_)
        throw DomainError("site dimension does not match kernel");
    if (is_srw())
        return x.l1() == 1 ? 1.0 / (2 * dim_) : 0.0;
    return c_ * profile(double(std::llabs(x[0])));
}

double JumpKernel::char_exponent(double xi) const
{
    if (dim_ != 1)
        throw DomainError("char_exponent: scalar argument needs d = 1");
    return char_exponent(std::vector<double>{xi});
}

double JumpKernel::char_exponent(const std::vector<double>& xi) const
{
    if (int(xi.size()) != dim_)
        throw DomainError("char_exponent: argument dimension mismatch");
    for (double v : xi)
        if (!(std::abs(v) <= kPi * (1 + 1e-15)))
            throw DomainError("char_exponent: xi must lie in [-pi, pi]^d");
    if (is_srw())
    {
        // 1 - (1/d) sum cos = (2/d) sum sin^2(xi/2)
        double s = 0;
        for (double v : xi)
        {
            double h = std::sin(v / 2);
            s += h * h;
        }
        return 2 * s / dim_;
    }
    return stable_q(std::abs(xi[0]));
}

double JumpKernel::stable_q(double xi) const
{
    if (xi == 0)
        return 0;
    const Table& t = *table_;
    const double g = gamma_, kappa = phi_.exponent();

    // direct part, n <= kDirect
    double direct = 0;
    double nx = kDirect * xi;
    if (nx < 0.5)
    {
        double x2 = xi * xi, term = 1;
        for (int k = 1; k <= kMoments; ++k)
        {
            term *= x2 / ((2 * k - 1) * (2 * k));
            direct += ((k % 2) ? 1 : -1) * term * t.mom[k];
        }
    }
    else
    {
        KahanSum s;
        for (int n = 1; n <= kDirect; ++n)
        {
            double h = std::sin(0.5 * n * xi);
            s.add(t.f[n] * 2 * h * h);
        }
        direct = s.value();
    }

    double tail;
    if (xi > 0.5)
    {
        // summation by parts on sum_{n>kDirect} f(n) e^{i n xi}
        constexpr int k = 6;
        const std::int64_t m0 = kDirect + 1;
        double fv[k];
        for (int i = 0; i < k; ++i)
            fv[i] = profile(double(m0 + i));
        std::complex<double> z = std::polar(1.0, xi), one_minus = 1.0 - z;
        std::complex<double> acc = 0, denom = one_minus;
        for (int j = 0; j < k; ++j)
        {
            // backward difference of order j at m0 + j
            double d = 0, binom = 1;
            for (int i = 0; i <= j; ++i)
            {
                d += ((i % 2) ? -binom : binom) * fv[j - i];
                binom = binom * (j - i) / (i + 1);
            }
            acc += d * std::polar(1.0, double(m0 + j) * xi) / denom;
            denom *= one_minus;
        }
        tail = t.tail_direct - std::real(acc);
    }
    else
    {
        const double a = kDirect + 0.5;
        // Euler-Maclaurin correction on g(r) = f(r)(1 - cos xi r)
        auto x = Jet<6>::variable(a);
        Jet<6> s, c;
        sincos(xi * x, s, c);
        Jet<6> omc = -1.0 * c;
        double h = std::sin(0.5 * xi * a);
        omc.a[0] = 2 * h * h;
        double corr = em_correction(profile_jet<6>(a, g, kappa) * omc);

        // D = int_a^inf f(r)(1 - cos xi r) dr
        double d;
        if (xi * a >= kOscCut)
        {
            d = profile_tail_integral(a) - cos_tail_ibp(a, xi, g, kappa);
        }
        else
        {
            auto hx = [&](double xx) {
                double r = xx / xi, hs = std::sin(0.5 * xx);
                return profile(r) * 2 * hs * hs;
            };
            double lo = xi * a, body = 0;
            // log panels up to x = 1
            if (lo < 1)
            {
                double llo = std::log(lo);
                int np = std::max(1, int(std::ceil(-llo)));
                double w = -llo / np;
                auto hl = [&](double u) {
                    double xx = std::exp(u);
                    return hx(xx) * xx;
                };
                for (int p = 0; p < np; ++p)
                    body += gauss_panel(hl, llo + p * w, llo + (p + 1) * w, 10);
                lo = 1;
            }
            // periods up to the cutoff
            double next = std::ceil(lo / (2 * kPi)) * 2 * kPi;
            if (next - lo > 1e-12)
            {
                body += gauss_panel(hx, lo, std::min(next, kOscCut), 16);
            }
            for (double p = next; p < kOscCut - 1e-9; p += 2 * kPi)
                body += gauss_panel(hx, p, p + 2 * kPi, 16);
            double rc = kOscCut / xi;
            d = body / xi + profile_tail_integral(rc) - cos_tail_ibp(rc, xi, g, kappa);
        }
        tail = d + corr;
    }
    return std::clamp(2 * c_ * (direct + tail), 0.0, 2.0);
}

//---------------------------------------------------------------------------//
std::int64_t JumpKernel::sample_abs(double u) const
{
    const auto& cdf = table_->cdf;
    if (u < cdf.back())
    {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return std::int64_t(it - cdf.begin());
    }
    // beyond R: invert the continuous profile tail on (R + 1/2, inf)
    double a = double(radius_) + 0.5;
    double w = (1 - u) / (1 - cdf.back());
    w = std::clamp(w, 1e-300, 1.0);
    double r;
    if (phi_.exponent() == 0)
    {
        r = (1 + a) * std::pow(w, -1 / gamma_) - 1;
    }
    else
    {
        double target = w * profile_tail_integral(a);
        double lo = std::log1p(a), hi = lo + 1;
        while (profile_tail_integral(std::expm1(hi)) > target && hi < 700)
            hi = lo + 2 * (hi - lo);
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it)
        {
            double mid = 0.5 * (lo + hi);
            (profile_tail_integral(std::expm1(mid)) > target ? lo : hi) = mid;
        }
        r = std::expm1(0.5 * (lo + hi));
    }
    r = std::min(r, 9.0e18);
    return std::max<std::int64_t>(radius_ + 1, std::llround(r));
}

Site JumpKernel::sample_jump(Rng& rng) const
{
    if (is_srw())
        return sample_nonzero_jump(rng);
    Site s(1);
    auto n = sample_abs(rng.uniform());
    s[0] = rng.coin() ? n : -n;
    return s;
}

Site JumpKernel::sample_nonzero_jump(Rng& rng) const
{
    Site s(dim_);
    if (is_srw())
    {
        auto axis = int(rng.below(std::uint64_t(dim_)));
        s[axis] = rng.coin() ? 1 : -1;
        return s;
    }
    double j0 = table_->cdf[0];
    double u = j0 + rng.uniform() * (1 - j0);
    auto n = std::max<std::int64_t>(1, sample_abs(u));
    s[0] = rng.coin() ? n : -n;
    return s;
}

std::string JumpKernel::describe() const
{
    std::ostringstream os;
    if (is_srw())
        os << "srw(d=" << dim_ << ")";
    else
        os << "stable(gamma=" << gamma_ << ",kappa=" << phi_.exponent() << ")";
    return os.str();
}

std::string Site::str() const
{
    std::ostringstream os;
    for (int i = 0; i < dim; ++i)
        os << (i ? " " : "") << c[i];
    return os.str();
}

//---------------------------------------------------------------------------//
JumpKernel make_srw_kernel(int d)
{
    if (d < 1)
        throw DomainError("make_srw_kernel: d must be >= 1");
    if (d > kMaxDim)
        throw DomainError("make_srw_kernel: d must be <= 8");
    JumpKernel k;
    k.variant_ = JumpKernel::Variant::srw;
    k.dim_ = d;
    k.c_ = 1.0 / (2 * d);
    return k;
}

JumpKernel make_stable_kernel(double gamma, PhiSpec phi, std::int64_t truncation_radius)
{
    if (!(gamma > 0 && gamma < 2))
        throw DomainError("make_stable_kernel: gamma must lie in (0, 2)");
    if (truncation_radius < 4 * kDirect)
        throw DomainError("make_stable_kernel: truncation radius too small");
    if (!std::isfinite(phi.kappa))
        throw DomainError("make_stable_kernel: kappa must be finite");

    JumpKernel k;
    k.variant_ = JumpKernel::Variant::stable;
    k.dim_ = 1;
    k.gamma_ = gamma;
    k.phi_ = phi;
    k.radius_ = truncation_radius;
    const std::int64_t R = truncation_radius;

    auto t = std::make_shared<JumpKernel::Table>();
    t->cdf.resize(R + 1);
    t->f.resize(kDirect + 1);

    // profile scan: unimodality check and partial sums
    std::vector<double> partial(R + 1);
    KahanSum sum, tail_direct;
    double prev = k.profile(0);
    for (std::int64_t n = 1; n <= R; ++n)
    {
        double f = k.profile(double(n));
        if (!(f <= prev) || !(f > 0))
            throw DomainError("make_stable_kernel: resulting kernel is not unimodal at |x| = "
                              + std::to_string(n));
        prev = f;
        sum.add(f);
        partial[n] = sum.value();
        if (n <= kDirect)
            t->f[n] = f;
        else
            tail_direct.add(f);
    }
    double a = double(R) + 0.5;
    auto fj = profile_jet<8>(a, gamma, phi.exponent());
    double beyond = k.profile_tail_integral(a) + em_correction(fj);
    // next Euler-Maclaurin term bounds the remainder
    k.tail_error_ = std::abs(127.0 / 154828800.0 * fj.deriv(7));
    t->tail_beyond_r = beyond;
    t->tail_direct = tail_direct.value() + beyond;

    double total = 1 + 2 * (sum.value() + beyond);
    k.c_ = 1 / total;
    for (std::int64_t n = 0; n <= R; ++n)
        t->cdf[n] = k.c_ * (1 + 2 * partial[n]);
    k.norm_residual_ = std::abs(t->cdf[R] + 2 * k.c_ * beyond - 1);

    t->mom.assign(kMoments + 1, 0.0);
    for (int m = 1; m <= kMoments; ++m)
    {
        KahanSum s;
        for (int n = 1; n <= kDirect; ++n)
            s.add(t->f[n] * std::pow(double(n), 2 * m));
        t->mom[m] = s.value();
    }
    k.table_ = std::move(t);
    return k;
}

}  // namespace rwpm
