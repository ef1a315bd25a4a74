#include "rwpm/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <mutex>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include "rwpm/quadrature.hpp"

namespace rwpm
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

void quiet_gsl()
{
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// e^{-x} I_n(x); zero on underflow.
double bessel_scaled(int n, double x)
{
    if (x == 0)
        return n == 0 ? 1.0 : 0.0;
    gsl_sf_result r;
    int status = n == 0 ? gsl_sf_bessel_I0_scaled_e(x, &r)
                        : (n == 1 ? gsl_sf_bessel_I1_scaled_e(x, &r)
                                  : gsl_sf_bessel_In_scaled_e(n, x, &r));
    if (status == GSL_EUNDRFLW)
        return 0.0;
    if (status != GSL_SUCCESS)
        throw NumericalError(std::string("bessel I_n failed: ") + gsl_strerror(status));
    return std::max(0.0, r.val);
}

// Barycentric weights for Gauss-Legendre nodes (ascending).
std::vector<double> gl_bary(const GaussRule& r)
{
    std::vector<double> b(r.x.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        b[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1 - r.x[j] * r.x[j]) * r.w[j]);
    return b;
}

}  // namespace

//---------------------------------------------------------------------------//
struct TransitionEngine::Backend
{
    virtual ~Backend() = default;
    virtual double p0(double t) const = 0;
    virtual double dp0(double t) const = 0;
    virtual double p(double t, const Site& y) const = 0;
    virtual double laplace(double b) const = 0;
    virtual double laplace_moment(double b) const = 0;
    // P(W_{k dt} = y) for k = k0..n (entries below k0 untouched).
    virtual void lags(const Site& y, double dt, std::size_t k0, std::vector<double>& out) const = 0;
    virtual std::size_t nodes() const { return 0; }
};

//---------------------------------------------------------------------------//
// Nearest-neighbour walk: products of scaled Bessel functions.
namespace
{
class SrwBackend final : public TransitionEngine::Backend
{
  public:
    explicit SrwBackend(int d) : d_(d)
    {
        // time nodes: two linear panels on [0,1], log panels up to d X
        const GaussRule& r = gauss_legendre(16);
        auto add_panel = [&](double a, double b, bool log_scale) {
            double h = 0.5 * (b - a), m = 0.5 * (a + b);
            for (std::size_t j = 0; j < r.x.size(); ++j)
            {
                double u = m + h * r.x[j];
                double t = log_scale ? std::exp(u) : u;
                double w = r.w[j] * h * (log_scale ? t : 1.0);
                t_.push_back(t);
                w_.push_back(w);
                p_.push_back(p0(t));
            }
        };
        add_panel(0, 0.5, false);
        add_panel(0.5, 1, false);
        double top = std::log(d_ * kX);
        int np = int(std::ceil(top / 0.25));
        for (int i = 0; i < np; ++i)
            add_panel(i * top / np, (i + 1) * top / np, true);

        // asymptotic series of e^{-x}I_0(x) sqrt(2 pi x), raised to the power d
        std::vector<double> a(kTerms, 0.0);
        a[0] = 1;
        for (int k = 1; k < kTerms; ++k)
            a[k] = a[k - 1] * (2 * k - 1) * (2 * k - 1) / (8.0 * k);
        c_ = {1.0};
        for (int m = 0; m < d_; ++m)
        {
            std::vector<double> n(kTerms, 0.0);
            for (int i = 0; i < kTerms; ++i)
                for (int j = 0; i + j < kTerms && j < int(c_.size()); ++j)
                    n[i + j] += a[i] * c_[j];
            c_ = n;
        }
    }

    double p0(double t) const override
    {
        return std::pow(bessel_scaled(0, t / d_), d_);
    }
    double dp0(double t) const override
    {
        double x = t / d_, i0 = bessel_scaled(0, x), i1 = bessel_scaled(1, x);
        return std::pow(i0, d_ - 1) * (i1 - i0);
    }
    double p(double t, const Site& y) const override
    {
        double v = 1;
        for (int j = 0; j < d_ && v > 0; ++j)
            v *= bessel_scaled(int(std::llabs(y[j])), t / d_);
        return v;
    }
    double laplace(double b) const override { return transform(b, 0); }
    double laplace_moment(double b) const override { return transform(b, 1); }

    void lags(const Site& y, double dt, std::size_t k0, std::vector<double>& out) const override
    {
        for (std::size_t k = k0; k < out.size(); ++k)
            out[k] = p(double(k) * dt, y);
    }

  private:
    static constexpr double kX = 1000;
    static constexpr int kTerms = 7;

    // int t^m e^{-bt} P(W_t = 0) dt, m in {0, 1}
    double transform(double b, int m) const
    {
        KahanSum s;
        for (std::size_t i = 0; i < t_.size(); ++i)
            s.add(w_[i] * p_[i] * std::exp(-b * t_[i]) * (m ? t_[i] : 1.0));
        double pref = std::pow(2 * kPi, -0.5 * d_) * std::pow(double(d_), 1 + m);
        double tail = 0;
        for (int k = 0; k < kTerms; ++k)
        {
            double v = power_exp_tail(0.5 * d_ + k - m, b * d_, kX);
            if (std::isinf(v))
                return kInf;
            tail += c_[k] * v;
        }
        return s.value() + pref * tail;
    }

    int d_;
    std::vector<double> t_, w_, p_, c_;
};

//---------------------------------------------------------------------------//
// Stable kernels: Fourier node sums in log(xi).
class StableBackend final : public TransitionEngine::Backend
{
  public:
    StableBackend(const JumpKernel& k, double t_max) : k_(k), g_(k.gamma())
    {
        double ylo = std::max(-600.0, -(std::log(t_max) + 35) / g_);
        double ytop = std::log(kPi);
        npanel_ = int(std::ceil((ytop - ylo) / kH));
        y0_ = ytop - npanel_ * kH;

        // coarse log panels below the main range, exact q
        const GaussRule& r8 = gauss_legendre(8);
        for (int p = 0; p < kPiecePanels; ++p)
        {
            double a = -kPieceDepth + p * (kPieceDepth / kPiecePanels);
            double hh = 0.5 * kPieceDepth / kPiecePanels;
            for (std::size_t j = 0; j < r8.x.size(); ++j)
            {
                double xi = std::exp(y0_ + a + hh * (1 + r8.x[j]));
                xi_.push_back(xi);
                w_.push_back(r8.w[j] * hh * xi);
            }
        }
        off_ = xi_.size();
        const GaussRule& r16 = gauss_legendre(kNodes);
        for (int p = 0; p < npanel_; ++p)
            for (int j = 0; j < kNodes; ++j)
            {
                double xi = std::exp(y0_ + p * kH + 0.5 * kH * (1 + r16.x[j]));
                if (p == npanel_ - 1)
                    xi = std::min(xi, kPi);
                xi_.push_back(xi);
                w_.push_back(r16.w[j] * 0.5 * kH * xi);
            }
        q_.resize(xi_.size());
        for (std::size_t i = 0; i < xi_.size(); ++i)
            q_[i] = k_.char_exponent(xi_[i]);
        sufmin_.resize(q_.size());
        double m = kInf;
        for (std::size_t i = q_.size(); i-- > 0;)
            sufmin_[i] = m = std::min(m, q_[i]);

        xi_m_ = std::exp(y0_ - kPieceDepth);
        q_m_ = k_.char_exponent(xi_m_);
        bary_ = gl_bary(r16);
        gx_ = r16.x;
    }

    std::size_t nodes() const override { return xi_.size(); }

    double p0(double t) const override
    {
        auto [n, xe] = cutoff(t);
        (void)xe;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += w_[i] * std::exp(-t * q_[i]);
        return (s + xi_m_ * std::exp(-t * q_m_)) / kPi;
    }
    double dp0(double t) const override
    {
        auto [n, xe] = cutoff(t);
        (void)xe;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += w_[i] * q_[i] * std::exp(-t * q_[i]);
        return -(s + xi_m_ * q_m_ * std::exp(-t * q_m_) / (1 + g_)) / kPi;
    }

    double p(double t, const Site& y) const override
    {
        double ay = std::abs(double(y[0]));
        if (ay == 0)
            return p0(t);
        std::vector<double> xs, ws, qs;
        build(t, ay, xs, ws, qs);
        double s = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            s += ws[i] * std::exp(-t * qs[i]);
        return std::max(0.0, s / kPi);
    }

    void lags(const Site& y, double dt, std::size_t k0, std::vector<double>& out) const override
    {
        if (k0 >= out.size())
            return;
        double ay = std::abs(double(y[0]));
        double t0 = double(k0) * dt;
        std::vector<double> xs, ws, qs;
        build(std::max(t0, 1e-300), ay, xs, ws, qs);
        std::vector<double> e(xs.size()), d(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            e[i] = ws[i] * std::exp(-t0 * qs[i]);
            d[i] = std::exp(-dt * qs[i]);
        }
        for (std::size_t k = k0; k < out.size(); ++k)
        {
            double s = 0;
            for (std::size_t i = 0; i < e.size(); ++i)
            {
                s += e[i];
                e[i] *= d[i];
            }
            out[k] = std::max(0.0, s / kPi);
        }
    }

    double laplace(double b) const override
    {
        KahanSum s;
        for (std::size_t i = 0; i < q_.size(); ++i)
            s.add(w_[i] / (b + q_[i]));
        return (s.value() + remainder(b, 1)) / kPi;
    }
    double laplace_moment(double b) const override
    {
        if (b == 0 && g_ >= 0.5)
            return kInf;
        KahanSum s;
        for (std::size_t i = 0; i < q_.size(); ++i)
            s.add(w_[i] / ((b + q_[i]) * (b + q_[i])));
        return (s.value() + remainder(b, 2)) / kPi;
    }

  private:
    static constexpr double kH = 0.25;
    static constexpr int kNodes = 16;
    static constexpr double kPieceDepth = 40;
    static constexpr int kPiecePanels = 20;
    static constexpr double kTqCut = 50;

    // number of nodes to keep at time t and the xi they reach
    std::pair<std::size_t, double> cutoff(double t) const
    {
        auto it = std::upper_bound(sufmin_.begin(), sufmin_.end(), kTqCut / t);
        std::size_t i = std::size_t(it - sufmin_.begin());
        if (i >= xi_.size())
            return {xi_.size(), kPi};
        if (i <= off_)
            return {i, i ? xi_[i - 1] : xi_m_};
        std::size_t p = (i - 1 - off_) / kNodes + 1;
        if (p >= std::size_t(npanel_))
            return {xi_.size(), kPi};
        return {off_ + p * kNodes, std::exp(y0_ + double(p) * kH)};
    }

    double q_interp(double xi) const
    {
        double yy = std::log(xi);
        int p = int(std::floor((yy - y0_) / kH));
        p = std::clamp(p, 0, npanel_ - 1);
        double x = 2 * (yy - (y0_ + p * kH)) / kH - 1;
        const double* q = &q_[off_ + std::size_t(p) * kNodes];
        double num = 0, den = 0;
        for (int j = 0; j < kNodes; ++j)
        {
            double dx = x - gx_[j];
            if (dx == 0)
                return q[j];
            double c = bary_[j] / dx;
            num += c * q[j];
            den += c;
        }
        return num / den;
    }

    // Node list for (1/pi) int e^{-tq} cos(xi y): weights include the cosine.
    void build(double t, double y, std::vector<double>& xs, std::vector<double>& ws,
               std::vector<double>& qs) const
    {
        auto [n, xend] = cutoff(t);
        auto push_nodes = [&](std::size_t upto) {
            for (std::size_t i = 0; i < upto; ++i)
            {
                xs.push_back(xi_[i]);
                ws.push_back(w_[i] * std::cos(xi_[i] * y));
                qs.push_back(q_[i]);
            }
        };
        xs.push_back(xi_m_);
        ws.push_back(xi_m_);
        qs.push_back(q_m_);
        if (n <= off_ || xend * y * (std::exp(kH) - 1) <= 2.5)
        {
            push_nodes(n);
            return;
        }
        double xc = 8 / y;
        int pc = int(std::floor((std::log(xc) - y0_) / kH));
        int pend = int((n - off_) / kNodes);
        pc = std::clamp(pc, 0, pend);
        push_nodes(off_ + std::size_t(pc) * kNodes);
        double a = std::exp(y0_ + pc * kH), b = xend;
        if (b <= a)
            return;
        std::size_t m = std::size_t(std::ceil((b - a) * y / kPi));
        double h = (b - a) / double(m);
        const GaussRule& r = gauss_legendre(10);
        for (std::size_t p = 0; p < m; ++p)
        {
            double lo = a + double(p) * h;
            for (std::size_t j = 0; j < r.x.size(); ++j)
            {
                double xi = lo + 0.5 * h * (1 + r.x[j]);
                xs.push_back(xi);
                ws.push_back(0.5 * h * r.w[j] * std::cos(xi * y));
                qs.push_back(q_interp(xi));
            }
        }
    }

    // int_0^{xi_m} (b + q)^{-power} dxi with q = q_m (xi/xi_m)^gamma
    double remainder(double b, int power) const
    {
        double r = q_m_ / b;
        if (b == 0 || r > 1e30)
        {
            double e = 1 - power * g_;
            if (e <= 0)
                return kInf;
            return xi_m_ / (std::pow(q_m_, power) * e);
        }
        // u = log(xi/xi_m); below uL the integrand is e^u / b^power
        double uL = std::min(-40.0, std::log(1 / r) / g_ - 40);
        int np = int(std::ceil(-uL / 2));
        auto f = [&](double u) {
            return std::exp(u) / std::pow(b + q_m_ * std::exp(g_ * u), power);
        };
        double s = gauss_composite(f, uL, 0.0, np, 8);
        return xi_m_ * (s + std::exp(uL) / std::pow(b, power));
    }

    JumpKernel k_;
    double g_;
    int npanel_ = 0;
    double y0_ = 0;
    std::size_t off_ = 0;
    std::vector<double> xi_, w_, q_, sufmin_, bary_, gx_;
    double xi_m_ = 0, q_m_ = 0;
};
}  // namespace

//---------------------------------------------------------------------------//
TransitionEngine::TransitionEngine(JumpKernel kernel, EngineOptions opts)
    : kernel_(std::move(kernel)), opts_(opts)
{
    quiet_gsl();
    if (!(opts_.t_min > 0 && opts_.t_max > opts_.t_min * 10 && opts_.per_decade >= 4))
        throw DomainError("TransitionEngine: bad time grid options");
    if (!(opts_.y_switch > 0))
        throw DomainError("TransitionEngine: y_switch must be positive");
    if (kernel_.is_srw())
        be_ = std::make_unique<SrwBackend>(kernel_.dim());
    else
        be_ = std::make_unique<StableBackend>(kernel_, opts_.t_max);

    if (kernel_.transient())
    {
        double lap = be_->laplace(0);
        if (!(lap > 0 && std::isfinite(lap)))
            throw NumericalError("beta0: return-time integral is not finite");
        beta0_ = 1 / lap;
    }

    log_t0_ = std::log(opts_.t_min);
    dlog_ = std::log(10.0) / opts_.per_decade;
    auto m = std::size_t(std::llround(std::log10(opts_.t_max / opts_.t_min) * opts_.per_decade));
    grid_.resize(m + 1);
    p_tab_.resize(m + 1);
    k_tab_.resize(m + 1);
    slope_tab_.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
    {
        double t = std::exp(log_t0_ + double(i) * dlog_);
        grid_[i] = t;
        double p = be_->p0(t);
        p_tab_[i] = p;
        k_tab_[i] = beta0_ * p;
        slope_tab_[i] = t * be_->dp0(t) / p;
    }
    bj_c_.assign(grid_.size(), std::numeric_limits<double>::quiet_NaN());
}

TransitionEngine::~TransitionEngine() = default;

std::size_t TransitionEngine::fourier_nodes() const
{
    return be_->nodes();
}

double TransitionEngine::beta0() const
{
    if (!kernel_.transient())
        throw RecurrentWalk();
    return beta0_;
}

double TransitionEngine::interp_logK(double t, double* slope) const
{
    double u = (std::log(t) - log_t0_) / dlog_;
    auto i = std::size_t(std::clamp(std::floor(u), 0.0, double(grid_.size() - 2)));
    double s = u - double(i);
    double f0 = std::log(p_tab_[i]), f1 = std::log(p_tab_[i + 1]);
    double d0 = slope_tab_[i] * dlog_, d1 = slope_tab_[i + 1] * dlog_;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2,
           h11 = s3 - s2;
    if (slope)
    {
        double dh00 = 6 * s2 - 6 * s, dh10 = 3 * s2 - 4 * s + 1, dh01 = -6 * s2 + 6 * s,
               dh11 = 3 * s2 - 2 * s;
        *slope = (dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1) / dlog_;
    }
    return h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
}

double TransitionEngine::return_prob(double t) const
{
    if (!(t >= 0))
        throw DomainError("return_prob: t must be >= 0");
    if (t == 0)
        return 1.0;
    if (kernel_.is_srw() || t < grid_.front() || t > grid_.back())
        return be_->p0(t);
    return std::exp(interp_logK(t, nullptr));
}

double TransitionEngine::return_prob_derivative(double t) const
{
    if (!(t >= 0))
        throw DomainError("return_prob_derivative: t must be >= 0");
    return be_->dp0(t);
}

double TransitionEngine::K(double t) const
{
    return beta0() * return_prob(t);
}

double TransitionEngine::K_prime(double t) const
{
    return beta0() * return_prob_derivative(t);
}

double TransitionEngine::k_prime_ratio(double t) const
{
    if (!(t > 0))
        throw DomainError("k_prime_ratio: t must be > 0");
    return t * be_->dp0(t) / be_->p0(t);
}

double TransitionEngine::laplace(double b) const
{
    if (!(b >= 0))
        throw DomainError("laplace: b must be >= 0");
    return be_->laplace(b);
}

double TransitionEngine::laplace_moment(double b) const
{
    if (!(b >= 0))
        throw DomainError("laplace_moment: b must be >= 0");
    return be_->laplace_moment(b);
}

double TransitionEngine::kscale(double t) const
{
    double p = return_prob(t);
    return kernel_.transient() ? beta0_ * p : p;
}

double TransitionEngine::big_jump_factor(double t) const
{
    auto direct = [&](double tt) {
        double ys = std::ceil(opts_.y_switch / kscale(tt));
        Site s = Site::axis(1, std::int64_t(std::min(ys, 9e18)));
        return be_->p(tt, s) / (tt * kernel_.prob(s));
    };
    if (t < grid_.front() || t > grid_.back())
        return direct(t);
    double u = (std::log(t) - log_t0_) / dlog_;
    auto i = std::size_t(std::clamp(std::floor(u), 0.0, double(grid_.size() - 2)));
    double s = u - double(i);
    double c[2];
    for (int k = 0; k < 2; ++k)
    {
        std::size_t j = i + std::size_t(k);
        {
            std::lock_guard<std::mutex> lock(bj_mutex_);
            c[k] = bj_c_[j];
        }
        if (std::isnan(c[k]))
        {
            c[k] = direct(grid_[j]);
            std::lock_guard<std::mutex> lock(bj_mutex_);
            bj_c_[j] = c[k];
        }
    }
    return c[0] + s * (c[1] - c[0]);
}

double TransitionEngine::transition_prob(double t, const Site& y) const
{
    if (!(t >= 0))
        throw DomainError("transition_prob: t must be >= 0");
    if (y.dim != dim())
        throw DomainError("transition_prob: site dimension mismatch");
    if (t == 0)
        return y.is_origin() ? 1.0 : 0.0;
    if (y.is_origin())
        return return_prob(t);
    if (!kernel_.is_srw())
    {
        double ay = std::abs(double(y[0]));
        if (ay * kscale(t) > opts_.y_switch)
            return big_jump_factor(t) * t * kernel_.prob(y);
    }
    return be_->p(t, y);
}

std::vector<double> TransitionEngine::transition_lags(const Site& y, double dt,
                                                      std::size_t n) const
{
    if (!(dt > 0))
        throw DomainError("transition_lags: dt must be > 0");
    if (y.dim != dim())
        throw DomainError("transition_lags: site dimension mismatch");
    std::vector<double> out(n + 1, 0.0);
    if (y.is_origin())
    {
        for (std::size_t k = 0; k <= n; ++k)
            out[k] = return_prob(double(k) * dt);
        return out;
    }
    std::size_t k0 = 1;
    if (!kernel_.is_srw())
    {
        double ay = std::abs(double(y[0]));
        double jy = kernel_.prob(y);
        while (k0 <= n)
        {
            double t = double(k0) * dt;
            if (ay * kscale(t) <= opts_.y_switch)
                break;
            out[k0] = big_jump_factor(t) * t * jy;
            ++k0;
        }
    }
    be_->lags(y, dt, k0, out);
    return out;
}

//---------------------------------------------------------------------------//
double stable_density_ratio(double gamma, double z)
{
    if (!(gamma > 0 && gamma <= 2))
        throw DomainError("stable_density_ratio: gamma must lie in (0, 2]");
    z = std::abs(z);
    if (z == 0)
        return 1.0;
    auto f = [&](double v) { return std::exp(-std::pow(v, gamma)); };
    double vmax = std::pow(60.0, 1 / gamma);
    double s = std::exp(-40.0);
    // log panels from e^{-40} up to min(vmax, 8/z)
    double top = std::min(vmax, 8 / z);
    double lo = -40, hi = std::log(top);
    int np = std::max(1, int(std::ceil((hi - lo) / 0.25)));
    auto fl = [&](double u) {
        double v = std::exp(u);
        return f(v) * std::cos(v * z) * v;
    };
    s += gauss_composite(fl, lo, hi, np, 16);
    if (top < vmax)
    {
        auto fc = [&](double v) { return f(v) * std::cos(v * z); };
        int m = int(std::ceil((vmax - top) * z / kPi));
        s += gauss_composite(fc, top, vmax, m, 10);
    }
    return s / std::tgamma(1 + 1 / gamma);
}

double TransitionEngine::llt_profile(double t, const Site& y) const
{
    if (y.dim != dim())
        throw DomainError("llt_profile: site dimension mismatch");
    if (kernel_.is_srw())
        return std::exp(-dim() * y.norm2() / (2 * t));
    double g = kernel_.gamma();
    double z = std::abs(double(y[0])) * return_prob(t) * kPi / std::tgamma(1 + 1 / g);
    return stable_density_ratio(g, z);
}

double TransitionEngine::llt_residual(double t, const std::vector<Site>& ys) const
{
    if (!(t > 0))
        throw DomainError("llt_residual: t must be > 0");
    double p0 = return_prob(t), r = 0;
    for (const auto& y : ys)
        r = std::max(r, std::abs(transition_prob(t, y) / p0 - llt_profile(t, y)));
    return r;
}

//---------------------------------------------------------------------------//
DisorderPath TransitionEngine::simulate_path(double rho, double T, Rng& rng) const
{
    if (!(rho >= 0 && rho < 1))
        throw DomainError("simulate_path: rho must lie in [0, 1)");
    if (!(T > 0))
        throw DomainError("simulate_path: T must be > 0");
    DisorderPath path;
    path.rate = rho;
    path.horizon = T;
    path.dim = dim();
    if (rho == 0)
        return path;
    // base walk on [0, rho T] with effective jumps, times mapped by 1/rho
    double rate = 1 - kernel_.zero_mass();
    double base_end = rho * T, s = 0;
    Site pos(dim());
    for (;;)
    {
        s += rng.exponential(rate);
        if (s > base_end)
            break;
        double t = std::min(s / rho, T);
        if (!path.times.empty() && t <= path.times.back())
            t = std::nextafter(path.times.back(), 2 * T);
        if (t > T)
            break;
        pos = pos + kernel_.sample_nonzero_jump(rng);
        path.times.push_back(t);
        path.positions.push_back(pos);
    }
    return path;
}

Site DisorderPath::at(double t) const
{
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin())
        return Site(dim);
    return positions[std::size_t(it - times.begin()) - 1];
}

std::vector<Site> DisorderPath::on_grid(double dt, std::size_t n) const
{
    std::vector<Site> out(n + 1, Site(dim));
    std::size_t e = 0;
    Site cur(dim);
    for (std::size_t k = 0; k <= n; ++k)
    {
        double t = double(k) * dt;
        while (e < times.size() && times[e] <= t * (1 + 1e-14))
            cur = positions[e++];
        out[k] = cur;
    }
    return out;
}

std::uint64_t DisorderPath::hash() const
{
    std::uint64_t h = mix64(std::uint64_t(dim) ^ 0x51ed27);
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        std::uint64_t b;
        std::memcpy(&b, &times[i], sizeof b);
        h = mix64(h ^ b);
        for (int j = 0; j < dim; ++j)
            h = mix64(h ^ std::uint64_t(positions[i][j]));
    }
    return h;
}

std::string DisorderPath::to_text(std::uint64_t seed) const
{
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", rate);
    os << "# rho=" << buf;
    std::snprintf(buf, sizeof buf, "%.17g", horizon);
    os << " T=" << buf << " seed=" << seed << " dim=" << dim << "\n";
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        std::snprintf(buf, sizeof buf, "%.17g", times[i]);
        os << buf << ' ' << positions[i].str() << "\n";
    }
    return os.str();
}

DisorderPath DisorderPath::from_text(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    DisorderPath p;
    bool header = false;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok)
            {
                auto eq = tok.find('=');
                if (eq == std::string::npos)
                    continue;
                auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "rho")
                    p.rate = std::stod(val);
                else if (key == "T")
                    p.horizon = std::stod(val);
                else if (key == "dim")
                    p.dim = std::stoi(val);
            }
            header = true;
            continue;
        }
        if (!header)
            throw DomainError("disorder path text: missing header");
        std::istringstream ls(line);
        double t;
        Site s(p.dim);
        if (!(ls >> t))
            throw DomainError("disorder path text: bad line '" + line + "'");
        for (int j = 0; j < p.dim; ++j)
            if (!(ls >> s[j]))
                throw DomainError("disorder path text: bad line '" + line + "'");
        if (!p.times.empty() && t <= p.times.back())
            throw DomainError("disorder path text: times must increase");
        p.times.push_back(t);
        p.positions.push_back(s);
    }
    if (!header)
        throw DomainError("disorder path text: missing header");
    return p;
}

}  // namespace rwpm
