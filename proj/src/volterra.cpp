#include "rwpm/volterra.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "rwpm/common.hpp"

namespace rwpm
{
namespace
{
constexpr std::size_t kLeaf = 64;

// Real FFT plans of size n, created once under a lock (the planner is not reentrant).
struct Plans
{
    fftw_plan fwd = nullptr, inv = nullptr;
};

const Plans& plans_for(std::size_t n)
{
    static std::mutex m;
    static std::map<std::size_t, Plans> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& p = cache[n];
    if (!p.fwd)
    {
        double* r = fftw_alloc_real(n);
        fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
        p.fwd = fftw_plan_dft_r2c_1d(int(n), r, c, FFTW_ESTIMATE);
        p.inv = fftw_plan_dft_c2r_1d(int(n), c, r, FFTW_ESTIMATE);
        fftw_free(r);
        fftw_free(c);
    }
    return p;
}

struct Buffer
{
    double* r = nullptr;
    fftw_complex* c = nullptr;
    explicit Buffer(std::size_t n) : r(fftw_alloc_real(n)), c(fftw_alloc_complex(n / 2 + 1)) {}
    ~Buffer()
    {
        fftw_free(r);
        fftw_free(c);
    }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
};

class Solver
{
  public:
    Solver(const std::vector<double>& f, const std::vector<double>& k, double dt)
        : f_(f), k_(k), dt_(dt), u_(f.size(), 0.0), acc_(f.size(), 0.0)
    {
        denom_ = 1 - 0.5 * dt * k[0];
        if (!(denom_ > 0))
            throw NumericalError("volterra: step too large (1 - dt k(0)/2 <= 0)");
    }

    std::vector<double> run()
    {
        std::size_t n = f_.size();
        u_[0] = f_[0];
        if (n == 1)
            return u_;
        std::size_t p = kLeaf;
        while (p < n)
            p *= 2;
        // kernel spectra per level, kernel segment k[0..2s)
        for (std::size_t s = kLeaf; 2 * s <= p; s *= 2)
        {
            std::size_t len = 2 * s;
            const Plans& pl = plans_for(len);
            Buffer b(len);
            for (std::size_t i = 0; i < len; ++i)
                b.r[i] = i < k_.size() ? k_[i] : 0.0;
            fftw_execute_dft_r2c(pl.fwd, b.r, b.c);
            spectra_[s].assign(reinterpret_cast<std::complex<double>*>(b.c),
                               reinterpret_cast<std::complex<double>*>(b.c) + len / 2 + 1);
        }
        solve(0, p);
        return u_;
    }

  private:
    // compute u on [l, r) given history from j < l already in acc_
    void solve(std::size_t l, std::size_t r)
    {
        std::size_t n = f_.size();
        if (l >= n)
            return;
        if (r - l <= kLeaf)
        {
            std::size_t hi = std::min(r, n);
            for (std::size_t i = std::max<std::size_t>(l, 1); i < hi; ++i)
            {
                double s = acc_[i];
                for (std::size_t j = std::max<std::size_t>(l, 1); j < i; ++j)
                    s += k_[i - j] * u_[j];
                u_[i] = (f_[i] + dt_ * (0.5 * k_[i] * u_[0] + s)) / denom_;
            }
            return;
        }
        std::size_t m = l + (r - l) / 2;
        solve(l, m);
        if (m < n)
            spread(l, m, r);
        solve(m, r);
    }

    // acc_[i] += sum_{j in [l,m)} k[i-j] u[j] for i in [m, r)
    void spread(std::size_t l, std::size_t m, std::size_t r)
    {
        std::size_t s = m - l, len = 2 * s;
        const Plans& pl = plans_for(len);
        Buffer b(len);
        for (std::size_t i = 0; i < s; ++i)
            b.r[i] = l + i < f_.size() ? u_[l + i] : 0.0;
        if (l == 0)
            b.r[0] = 0;  // the j = 0 term carries weight 1/2, added separately
        std::fill(b.r + s, b.r + len, 0.0);
        fftw_execute_dft_r2c(pl.fwd, b.r, b.c);
        const auto& ks = spectra_.at(s);
        auto* c = reinterpret_cast<std::complex<double>*>(b.c);
        for (std::size_t i = 0; i < len / 2 + 1; ++i)
            c[i] *= ks[i];
        fftw_execute_dft_c2r(pl.inv, b.c, b.r);
        std::size_t hi = std::min(r, f_.size());
        double scale = 1.0 / double(len);
        for (std::size_t i = m; i < hi; ++i)
            acc_[i] += b.r[i - l] * scale;
    }

    const std::vector<double>& f_;
    const std::vector<double>& k_;
    double dt_, denom_;
    std::vector<double> u_, acc_;
    std::map<std::size_t, std::vector<std::complex<double>>> spectra_;
};

void check_inputs(const std::vector<double>& f, const std::vector<double>& k, double dt)
{
    if (f.empty() || k.size() < f.size())
        throw DomainError("volterra: kernel must cover the forcing grid");
    if (!(dt > 0))
        throw DomainError("volterra: dt must be > 0");
}

}  // namespace

std::vector<double> volterra_convolution(const std::vector<double>& f,
                                         const std::vector<double>& k, double dt)
{
    check_inputs(f, k, dt);
    Solver s(f, k, dt);
    return s.run();
}

std::vector<double> volterra_convolution_direct(const std::vector<double>& f,
                                                const std::vector<double>& k, double dt)
{
    check_inputs(f, k, dt);
    double denom = 1 - 0.5 * dt * k[0];
    if (!(denom > 0))
        throw NumericalError("volterra: step too large (1 - dt k(0)/2 <= 0)");
    std::vector<double> u(f.size());
    u[0] = f[0];
    for (std::size_t n = 1; n < f.size(); ++n)
    {
        double s = 0.5 * k[n] * u[0];
        for (std::size_t j = 1; j < n; ++j)
            s += k[n - j] * u[j];
        u[n] = (f[n] + dt * s) / denom;
    }
    return u;
}

}  // namespace rwpm
