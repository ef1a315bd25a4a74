#include "rwpm/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "rwpm/quadrature.hpp"

namespace rwpm
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

// Cubic Hermite on [0, 1] and its derivative.
struct Hermite
{
    double f0, f1, d0, d1;
    double operator()(double s) const
    {
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * f1 +
               (s3 - s2) * d1;
    }
    double deriv(double s) const
    {
        double s2 = s * s;
        return (6 * s2 - 6 * s) * f0 + (3 * s2 - 4 * s + 1) * d0 + (-6 * s2 + 6 * s) * f1 +
               (3 * s2 - 2 * s) * d1;
    }
};

// Root of h(s) = y on [0, 1] for monotone h, Newton with bisection fallback.
double solve_hermite(const Hermite& h, double y)
{
    double lo = 0, hi = 1;
    bool inc = h.f1 > h.f0;
    double s = (h.f1 != h.f0) ? std::clamp((y - h.f0) / (h.f1 - h.f0), 0.0, 1.0) : 0.5;
    for (int it = 0; it < 100; ++it)
    {
        double v = h(s) - y;
        if ((v < 0) == inc)
            lo = s;
        else
            hi = s;
        double d = h.deriv(s);
        double ns = (d != 0) ? s - v / d : 0.5 * (lo + hi);
        if (!(ns > lo && ns < hi))
            ns = 0.5 * (lo + hi);
        if (std::abs(ns - s) < 1e-15 || hi - lo < 1e-15)
            return ns;
        s = ns;
    }
    return s;
}
}  // namespace

//---------------------------------------------------------------------------//
std::string RenewalSample::to_text() const
{
    std::ostringstream os;
    os << "# " << (law == Law::pinned ? "pinned" : "stationary") << ' ';
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", horizon);
    os << buf << '\n';
    for (double t : points)
    {
        std::snprintf(buf, sizeof buf, "%.17g", t);
        os << buf << '\n';
    }
    return os.str();
}

//---------------------------------------------------------------------------//
RenewalLaw::RenewalLaw(const FreeEnergyTable& tab) : tab_(&tab)
{
    const auto& g = tab.grid();
    auto build = [&](Inverter& inv, int moment, const std::vector<double>& bar, double norm) {
        inv.moment = moment;
        inv.norm = norm;
        if (!std::isfinite(norm))
            return;
        std::size_t n = g.size();
        inv.logt.resize(n);
        inv.logS.resize(n);
        inv.slope.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            double t = g[i];
            double dens = tab.K_beta(t) * (moment ? t : 1.0);
            inv.logt[i] = std::log(t);
            inv.logS[i] = std::log(bar[i] / norm);
            inv.slope[i] = -t * dens / bar[i];
        }
        inv.t0 = g.front();
        inv.head_mass = 1 - bar[0] / norm;
        inv.g0 = moment ? 0.0 : tab.K_beta(0) / norm;
        inv.g1 = tab.K_beta(inv.t0) * (moment ? inv.t0 : 1.0) / norm;
    };
    build(gap_, 0, tab.bar_table(), tab.mass_time_domain());
    build(sized_, 1, tab.bar_moment_table(), tab.mean_time_domain());
}

double RenewalLaw::tail_survival(double t, int moment) const
{
    return moment ? tab_->K_beta_bar_moment(t) : tab_->K_beta_bar(t);
}

double RenewalLaw::invert(const Inverter& inv, double u) const
{
    // u is the target survival probability
    double s_t0 = 1 - inv.head_mass;
    if (u >= s_t0)
    {
        Hermite h{0.0, inv.head_mass, inv.g0 * inv.t0, inv.g1 * inv.t0};
        return inv.t0 * solve_hermite(h, 1 - u);
    }
    double lu = std::log(u);
    if (lu >= inv.logS.back())
    {
        // logS is decreasing: first index with logS < lu
        auto it = std::lower_bound(inv.logS.begin(), inv.logS.end(), lu,
                                   [](double a, double b) { return a >= b; });
        auto i = std::size_t(it - inv.logS.begin());
        i = std::clamp<std::size_t>(i, 1, inv.logS.size() - 1) - 1;
        double dl = inv.logt[i + 1] - inv.logt[i];
        Hermite h{inv.logS[i], inv.logS[i + 1], inv.slope[i] * dl, inv.slope[i + 1] * dl};
        return std::exp(inv.logt[i] + dl * solve_hermite(h, lu));
    }
    // past the grid end: bisection in log t on the analytic tail
    double T = std::exp(inv.logt.back());
    auto S = [&](double t) { return tail_survival(t, inv.moment) / inv.norm; };
    double lo = T, hi = 2 * T;
    while (S(hi) > u)
    {
        lo = hi;
        hi *= 2;
        if (hi > 1e300)
            return hi;
    }
    for (int it = 0; it < 200 && hi / lo - 1 > 1e-14; ++it)
    {
        double m = std::sqrt(lo * hi);
        if (S(m) > u)
            lo = m;
        else
            hi = m;
    }
    return std::sqrt(lo * hi);
}

double RenewalLaw::survival(double t) const
{
    if (!(t >= 0))
        throw DomainError("survival: t must be >= 0");
    return tab_->K_beta_bar(t) / gap_.norm;
}

double RenewalLaw::sample_gap(Rng& rng) const
{
    return invert(gap_, rng.uniform());
}

double RenewalLaw::sample_size_biased(Rng& rng) const
{
    if (!std::isfinite(sized_.norm))
        throw DomainError("size-biased gap: infinite mean inter-arrival");
    return invert(sized_, rng.uniform());
}

double RenewalLaw::sample_delay(Rng& rng) const
{
    double x = sample_size_biased(rng);
    return rng.uniform() * x;
}

RenewalSample RenewalLaw::sample_pinned(double T, Rng& rng) const
{
    if (!(T >= 0))
        throw DomainError("sample_pinned: T must be >= 0");
    RenewalSample s;
    s.law = RenewalSample::Law::pinned;
    s.rng = Rng(rng.bits());
    s.points = {0.0};
    s.next = sample_gap(s.rng);
    extend(s, T);
    return s;
}

RenewalSample RenewalLaw::sample_stationary(double T, Rng& rng) const
{
    if (!(T >= 0))
        throw DomainError("sample_stationary: T must be >= 0");
    const auto& e = tab_->engine();
    if (!(tab_->beta() > (e.transient() ? e.beta0() : 0.0)))
        throw DomainError("sample_stationary: needs beta > beta0 (finite mean gap)");
    RenewalSample s;
    s.law = RenewalSample::Law::stationary;
    s.rng = Rng(rng.bits());
    s.next = sample_delay(s.rng);
    extend(s, T);
    return s;
}

void RenewalLaw::extend(RenewalSample& s, double T) const
{
    if (T <= s.horizon)
        return;
    double cur = s.next;
    while (cur <= T)
    {
        s.points.push_back(cur);
        cur += sample_gap(s.rng);
    }
    s.next = cur;
    s.horizon = T;
}

//---------------------------------------------------------------------------//
namespace
{
struct Side
{
    long hits = 0, first = 0, second = 0;
    std::vector<double> first_gaps;
};

Side scan(const std::vector<double>& tau, const std::vector<double>& tp, double a, double b,
          bool skip_first, bool keep_gaps)
{
    Side r;
    std::size_t j = 0, k = 0;
    for (std::size_t i = skip_first ? 1 : 0; i + 1 < tau.size(); ++i)
    {
        double l = tau[i], h = tau[i + 1];
        if (h > b)
            break;
        if (l < a)
            continue;
        while (j < tp.size() && tp[j] < l)
            ++j;
        if (k < j)
            k = j;
        while (k < tp.size() && tp[k] <= h)
            ++k;
        if (k == j)
            continue;
        ++r.hits;
        double mid = 0.5 * (l + h);
        if (tp[j] <= mid)
        {
            ++r.first;
            if (keep_gaps)
                r.first_gaps.push_back(h - l);
        }
        if (tp[k - 1] >= mid)
            ++r.second;
    }
    return r;
}
}  // namespace

OverlapStats overlap_stats(const std::vector<double>& tau, const std::vector<double>& tau_p,
                           double a, double b, const std::vector<double>& h_list,
                           bool skip_first)
{
    if (!(a <= b))
        throw DomainError("overlap_stats: need a <= b");
    OverlapStats st;
    Side s1 = scan(tau, tau_p, a, b, skip_first, true);
    Side s2 = scan(tau_p, tau, a, b, skip_first, false);
    st.j1 = s1.hits;
    st.j2 = s2.hits;
    st.frak_j = s1.first;
    st.frak_j_prime = s1.second;
    for (double H : h_list)
    {
        if (!(H >= 1))
            throw DomainError("overlap_stats: H must be >= 1");
        double lo = (H == 1) ? 0.0 : H;
        long c = 0;
        for (double gap : s1.first_gaps)
            if (gap > lo && gap <= 2 * H)
                ++c;
        st.n_h[H] = c;
    }
    return st;
}

OverlapStats overlap_stats(const RenewalSample& tau, const RenewalSample& tau_p, double a,
                           double b, const std::vector<double>& h_list)
{
    if (a < 0 || b > tau.horizon || b > tau_p.horizon)
        throw DomainError("overlap_stats: window outside sample coverage");
    if (tau.law != tau_p.law)
        throw DomainError("overlap_stats: samples of different laws");
    bool skip = tau.law == RenewalSample::Law::pinned;
    return overlap_stats(tau.points, tau_p.points, a, b, h_list, skip);
}

//---------------------------------------------------------------------------//
long OvershootTrace::count_up_to(double t) const
{
    long best = 0;
    for (std::size_t i = 1; i < T.size(); ++i)
    {
        if (T[i] <= t)
            best = long(i) - 1;
        else
            break;
    }
    return best;
}

OvershootTrace iterated_overshoots(const std::vector<double>& tau,
                                   const std::vector<double>& tau_p, double T,
                                   std::size_t first, std::size_t first_p)
{
    if (!(T > 0))
        throw DomainError("iterated_overshoots: T must be > 0");
    OvershootTrace tr;
    if (tau.size() <= first || tau_p.size() <= first_p)
    {
        tr.truncated = true;
        return tr;
    }
    const std::vector<double>* pts[2] = {&tau, &tau_p};
    std::size_t used[2] = {first, first_p};
    double a = tau[first], b = tau_p[first_p];
    // proc: which process supplies the next point
    int proc;
    if (b <= a)
    {
        tr.T = {b, a};
        tr.t0_in_tau = true;
        proc = 1;
    }
    else
    {
        tr.T = {a, b};
        tr.t0_in_tau = false;
        proc = 0;
    }
    tr.S = {tr.T[1] - tr.T[0]};
    for (long j = 1;; ++j)
    {
        const auto& p = *pts[proc];
        std::size_t i = used[proc] + 1;
        double prev = tr.T.back();
        while (i < p.size() && p[i] < prev)
            ++i;
        if (i >= p.size())
        {
            tr.truncated = true;
            return tr;
        }
        used[proc] = i;
        tr.T.push_back(p[i]);
        tr.S.push_back(p[i] - prev);
        if (tr.S.back() >= T)
        {
            tr.D = j;
            return tr;
        }
        proc = 1 - proc;
    }
}

OvershootTrace iterated_overshoots(const RenewalLaw& law, RenewalSample& tau,
                                   RenewalSample& tau_p, double T, int max_doublings)
{
    if (tau.law != tau_p.law)
        throw DomainError("iterated_overshoots: samples of different laws");
    std::size_t first = tau.law == RenewalSample::Law::pinned ? 1 : 0;
    for (int k = 0;; ++k)
    {
        auto a = tau.points, b = tau_p.points;
        a.push_back(tau.next);
        b.push_back(tau_p.next);
        auto tr = iterated_overshoots(a, b, T, first, first);
        if (!tr.truncated || k >= max_doublings)
            return tr;
        double h = std::max({tau.horizon, tau_p.horizon, T, 1.0});
        law.extend(tau, 2 * h);
        law.extend(tau_p, 2 * h);
    }
}

//---------------------------------------------------------------------------//
double psi_H(const SlowFunction& L, double H, double T)
{
    if (!(H > 0) || H > T)
        throw DomainError("psi_H: need 0 < H <= T");
    double lh = L(H);
    auto f = [&](double x) {
        double l = L(std::exp(x));
        return lh * lh / (l * l);
    };
    double a = std::log(H / 2), b = std::log(T);
    int panels = std::max(1, int(std::ceil((b - a) / 0.25)));
    return gauss_composite(f, a, b, panels, 8);
}

double R_function(const SlowFunction& L, double t)
{
    if (!(t >= 1))
        throw DomainError("R_function: t must be >= 1");
    // x = log s; R = int_0^X A(x) / L(e^x)^2 dx with A(x) = int_0^x L(e^y)^2 dy
    double X = std::log(t);
    if (X == 0)
        return 0;
    auto l2 = [&](double y) {
        double l = L(std::exp(y));
        return l * l;
    };
    int panels = std::max(1, int(std::ceil(X / 0.25)));
    double h = X / panels, A = 0, R = 0;
    const GaussRule& r = gauss_legendre(8);
    for (int p = 0; p < panels; ++p)
    {
        double a = p * h, half = 0.5 * h, m = a + half;
        for (std::size_t k = 0; k < r.x.size(); ++k)
        {
            double x = m + half * r.x[k];
            double ax = A + gauss_panel(l2, a, x, 8);
            R += r.w[k] * half * ax / l2(x);
        }
        A += gauss_panel(l2, a, a + h, 8);
    }
    return R;
}

SlowFunction slow_part(const TransitionEngine& e)
{
    double expo = 1 + e.alpha();
    if (e.transient())
        return [&e, expo](double t) { return e.K(t) * std::pow(t, expo); };
    return [&e, expo](double t) { return e.return_prob(t) * std::pow(t, expo); };
}

//---------------------------------------------------------------------------//
namespace
{
struct GslWork
{
    gsl_integration_workspace* w;
    explicit GslWork(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
    ~GslWork() { gsl_integration_workspace_free(w); }
    GslWork(const GslWork&) = delete;
    GslWork& operator=(const GslWork&) = delete;
};

template<class F>
double gsl_call(double x, void* p)
{
    return (*static_cast<F*>(p))(x);
}

template<class F>
gsl_function wrap(F& f)
{
    gsl_function g;
    g.function = &gsl_call<F>;
    g.params = &f;
    return g;
}
}  // namespace

double overshoot_limit_quadrature(double alpha, double kappa)
{
    if (!(alpha > 0 && alpha < 1) || !(kappa >= 0 && alpha + kappa < 1))
        throw DomainError("overshoot_limit_quadrature: need 0 < alpha, 0 <= kappa, alpha + kappa < 1");
    gsl_set_error_handler_off();
    GslWork inner_w(2000), outer_w(2000);
    double c = alpha * std::sin(kPi * alpha) / kPi;
    auto integrate = [](gsl_integration_workspace* w, auto& f, double a, double b) {
        gsl_function gf = wrap(f);
        double res, err;
        int st = gsl_integration_qags(&gf, a, b, 0, 1e-11, 2000, w, &res, &err);
        if (st != GSL_SUCCESS && st != GSL_EROUND)
            throw NumericalError(std::string("overshoot quadrature: ") + gsl_strerror(st));
        return res;
    };
    // f0(s) = c int_0^1 x^{alpha-1} (1 + s - x)^{-(1+alpha)} dx, split at x = 1/2:
    // x = w^{1/alpha} on the left, 1 - x = s (e^v - 1) on the right.
    auto f0 = [&](double s) {
        auto left = [&](double w) {
            return std::pow(1 + s - std::pow(w, 1 / alpha), -(1 + alpha)) / alpha;
        };
        auto right = [&](double v) {
            double z = s * std::expm1(v);
            return std::pow(1 - z, alpha - 1) * std::exp(-alpha * v);
        };
        double V = std::log1p(0.5 / s);
        return c * (integrate(inner_w.w, left, 0, std::pow(0.5, alpha)) +
                    std::pow(s, -alpha) * integrate(inner_w.w, right, 0, V));
    };
    // int_0^inf s^{-kappa} f0(s) ds with s = e^y; the integrand decays like
    // e^{(1-alpha-kappa) y} and e^{-(alpha+kappa) y} at the two ends
    double cut = 60 / std::min(1 - alpha - kappa, alpha + kappa);
    auto outer = [&](double y) { return std::exp((1 - kappa) * y) * f0(std::exp(y)); };
    double res = 0;
    for (double a = -cut; a < cut; a += cut / 8)
        res += integrate(outer_w.w, outer, a, a + cut / 8);
    return res;
}

}  // namespace rwpm
