#include "rwpm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rwpm/parallel.hpp"
#include "rwpm/quenched.hpp"
#include "rwpm/rng.hpp"

namespace rwpm
{
double MomentExperiment::T() const
{
    if (!table)
        throw DomainError("moment experiment: no free energy table");
    if (!(table->F() > 0))
        throw DomainError("moment experiment: needs beta > beta0 (F(beta) = 0)");
    return A / table->F();
}

void MomentExperiment::validate() const
{
    if (!(A > 1))
        throw DomainError("moment experiment: A must be > 1");
    if (!(eta > 0 && eta < 1))
        throw DomainError("moment experiment: eta must lie in (0, 1)");
    if (n_pairs < 2)
        throw DomainError("moment experiment: n_pairs must be >= 2");
    double t = T();
    for (double h : h_list)
    {
        double l = std::log2(h);
        if (!(h >= 1) || l != std::round(l))
            throw DomainError("moment experiment: H list must be dyadic (1, 2, 4, ...)");
        if (h > t)
            throw DomainError("moment experiment: H = " + std::to_string(h) + " exceeds T");
    }
}

std::vector<double> dyadic_h_list(double T)
{
    std::vector<double> h{1};
    while (2 * h.back() < T)
        h.push_back(2 * h.back());
    return h;
}

std::vector<PairRecord> sample_pairs(const MomentExperiment& exp, bool with_overshoots)
{
    exp.validate();
    double T = exp.T();
    RenewalLaw law(*exp.table);
    std::vector<PairRecord> out(exp.n_pairs);
    parallel_for(exp.n_pairs, exp.workers, [&](std::size_t i, int) {
        Rng rng(task_seed(exp.seed, i));
        auto a = law.sample_stationary(T, rng);
        auto b = law.sample_stationary(T, rng);
        auto st = overlap_stats(a, b, 0, T, exp.h_list);
        PairRecord& r = out[i];
        r.j1 = st.j1;
        r.j2 = st.j2;
        r.frak_j = st.frak_j;
        r.frak_j_prime = st.frak_j_prime;
        for (double h : exp.h_list)
            r.n_h.push_back(st.n_h.at(h));
        if (with_overshoots)
        {
            auto tr = iterated_overshoots(law, a, b, T);
            r.D = tr.D;
            r.truncated = tr.truncated;
            r.count_to_T = tr.count_up_to(T);
        }
    });
    return out;
}

LaplaceEstimate exp_moment(const std::vector<long>& x, double u)
{
    if (!(u >= 0))
        throw DomainError("exponential moment: u must be >= 0");
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        v[i] = std::expm1(u * double(x[i]));
    LaplaceEstimate r;
    r.u = u;
    auto me = mean_stderr(v);
    r.mean = me.mean;
    r.std_err = me.std_err;
    r.batch_std_err = v.size() >= 40 ? batch_means_stderr(v) : me.std_err;
    r.max_share = max_share(v);
    r.unreliable = r.max_share > 0.1;
    return r;
}

LaplaceEstimate overlap_laplace(const std::vector<PairRecord>& pairs, double u)
{
    std::vector<long> x;
    for (const auto& p : pairs)
        x.push_back(p.frak_j);
    return exp_moment(x, u);
}

LaplaceEstimate overlap_laplace(const MomentExperiment& exp, double u)
{
    return overlap_laplace(sample_pairs(exp), u);
}

double holder_split(const std::vector<PairRecord>& pairs, double u, double r)
{
    if (pairs.empty())
        throw DomainError("holder_split: no pairs");
    if (!(r > 1))
        throw DomainError("holder_split: r must be > 1");
    std::size_t m = pairs[0].n_h.size();
    for (const auto& p : pairs)
    {
        long s = 0;
        for (long n : p.n_h)
            s += n;
        if (s != p.frak_j)
            throw DomainError("holder_split: H list does not cover all gaps");
    }
    double log_prod = 0;
    for (std::size_t k = 0; k < m; ++k)
    {
        double p = std::pow(r, double(k + 1)) / (r - 1);
        std::vector<double> v;
        for (const auto& q : pairs)
            v.push_back(std::exp(u * p * double(q.n_h[k])));
        log_prod += std::log(pairwise_sum(v) / double(v.size())) / p;
    }
    return std::expm1(log_prod);
}

LaplaceEstimate dt_laplace(const std::vector<PairRecord>& pairs, double u)
{
    std::vector<long> x;
    for (const auto& p : pairs)
    {
        if (p.D < 0)
            throw DomainError("dt_laplace: pair without D_T (sample with overshoots)");
        x.push_back(p.D);
    }
    return exp_moment(x, u);
}

double dt_threshold(const std::vector<PairRecord>& pairs, double target,
                    const std::vector<double>& u_grid)
{
    double best = 0;
    for (double u : u_grid)
    {
        if (dt_laplace(pairs, u).mean > target)
            break;
        best = u;
    }
    return best;
}

NhTail nh_tail(const MomentExperiment& exp, const std::vector<PairRecord>& pairs, double H,
               std::size_t k_max)
{
    auto it = std::find(exp.h_list.begin(), exp.h_list.end(), H);
    if (it == exp.h_list.end())
        throw DomainError("nh_tail: H not in the experiment's H list");
    std::size_t idx = std::size_t(it - exp.h_list.begin());
    if (pairs.empty())
        throw DomainError("nh_tail: no pairs");
    long top = 0;
    std::vector<double> vals;
    for (const auto& p : pairs)
    {
        top = std::max(top, p.n_h[idx]);
        vals.push_back(double(p.n_h[idx]));
    }
    // cnt[k] = #{N_H >= k}
    std::vector<double> cnt(std::size_t(top) + 2, 0);
    for (const auto& p : pairs)
        for (long k = 1; k <= p.n_h[idx]; ++k)
            cnt[std::size_t(k)] += 1;
    double n = double(pairs.size());
    NhTail r;
    r.H = H;
    r.mean = pairwise_sum(vals) / n;
    for (long k = 1; k <= top; ++k)
        r.tail_sum += cnt[std::size_t(k)] / n;
    std::size_t k_fit = 0;
    while (k_fit + 1 < cnt.size() && cnt[k_fit + 1] >= 20)
        ++k_fit;
    if (k_max == 0)
        k_max = std::max<std::size_t>(k_fit, 1);
    if (k_max >= cnt.size() || cnt[k_max] == 0)
        throw DomainError("nh_tail: tail empty at k = " + std::to_string(k_max) +
                          "; increase n_pairs or lower k_max");
    for (std::size_t k = 1; k <= k_max; ++k)
        r.tail.push_back(cnt[k] / n);
    k_fit = std::min(k_fit, k_max);
    if (k_fit >= 2)
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, m = double(k_fit);
        for (std::size_t k = 1; k <= k_fit; ++k)
        {
            double x = double(k), y = std::log(cnt[k] / n);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        r.rate = -std::expm1(slope);
    }
    else
    {
        r.rate = std::numeric_limits<double>::quiet_NaN();
    }
    const auto& e = exp.table->engine();
    double a = e.alpha(), T = exp.T();
    if (std::abs(a - 0.5) < 1e-12)
        r.reference = 1 / psi_H(slow_part(e), H, T);
    else
        r.reference = std::pow(H / T, 2 * a - 1);
    return r;
}

std::vector<OvershootMoment> overshoot_ratio_moment(const MomentExperiment& exp, double kappa,
                                                   const std::vector<double>& v_list,
                                                   double eps_w)
{
    exp.validate();
    if (v_list.empty())
        throw DomainError("overshoot_ratio_moment: empty v list");
    if (!(eps_w > 0 && eps_w < 1))
        throw DomainError("overshoot_ratio_moment: window must lie in (0, 1)");
    double vmax = *std::max_element(v_list.begin(), v_list.end());
    RenewalLaw law(*exp.table);
    std::vector<double> s1(exp.n_pairs), s2(exp.n_pairs);
    parallel_for(exp.n_pairs, exp.workers, [&](std::size_t i, int) {
        Rng rng(task_seed(exp.seed, i));
        double h = 2 * vmax;
        auto a = law.sample_stationary(h, rng);
        auto b = law.sample_stationary(h, rng);
        for (int k = 0;; ++k)
        {
            auto pa = a.points, pb = b.points;
            pa.push_back(a.next);
            pb.push_back(b.next);
            auto tr = iterated_overshoots(pa, pb, std::numeric_limits<double>::max(), 0, 0);
            if (tr.S.size() >= 3)
            {
                s1[i] = tr.S[1];
                s2[i] = tr.S[2];
                return;
            }
            if (k > 60)
                throw NumericalError("overshoot_ratio_moment: overshoots not reached");
            h *= 2;
            law.extend(a, h);
            law.extend(b, h);
        }
    });
    std::vector<OvershootMoment> out;
    for (double v : v_list)
    {
        std::vector<double> vals;
        for (std::size_t i = 0; i < exp.n_pairs; ++i)
            if (s1[i] >= v * (1 - eps_w) && s1[i] <= v * (1 + eps_w))
                vals.push_back(std::pow(s2[i] / s1[i], -kappa));
        if (vals.size() < 10)
            throw DomainError("overshoot_ratio_moment: only " + std::to_string(vals.size()) +
                              " pairs with S_1 near v = " + std::to_string(v));
        auto me = mean_stderr(vals);
        out.push_back({v, me.mean, me.std_err, vals.size()});
    }
    return out;
}

MomentRatio moment_ratio_direct(const TransitionEngine& e, double beta, double A, double eta,
                                std::size_t steps, double rho, std::size_t n_disorder,
                                std::uint64_t seed, int workers)
{
    if (n_disorder < 2)
        throw DomainError("moment_ratio_direct: n_disorder must be >= 2");
    auto spec = block_spec(e, rho, beta, A, steps);
    workers = std::max(1, std::min<int>(workers, int(n_disorder)));
    std::vector<std::unique_ptr<QuenchedSolver>> solvers;
    for (int w = 0; w < workers; ++w)
        solvers.push_back(std::make_unique<QuenchedSolver>(spec));
    MomentRatio r;
    r.T = spec.T;
    r.log_z.resize(n_disorder);
    parallel_for(n_disorder, workers, [&](std::size_t i, int w) {
        Rng rng(task_seed(seed, i));
        auto path = e.simulate_path(rho, spec.T, rng);
        r.log_z[i] = solvers[std::size_t(w)]->log_block_hat_Z(path, eta);
    });
    // the ratio is scale free; shift to keep exp finite
    double ref = r.log_z[0];
    std::vector<double> z(n_disorder), z2(n_disorder);
    for (std::size_t i = 0; i < n_disorder; ++i)
    {
        z[i] = std::exp(r.log_z[i] - ref);
        z2[i] = z[i] * z[i];
    }
    auto me = second_moment_ratio(z);
    r.ratio = me.mean;
    r.std_err = me.std_err;
    if (n_disorder >= 40)
    {
        // batch means of the ratio estimator itself
        std::size_t nb = 20, b = n_disorder / nb;
        std::vector<double> rb(nb);
        for (std::size_t k = 0; k < nb; ++k)
        {
            double m1 = pairwise_sum(z.data() + k * b, b) / double(b);
            double m2 = pairwise_sum(z2.data() + k * b, b) / double(b);
            rb[k] = m2 / (m1 * m1);
        }
        r.batch_std_err = mean_stderr(rb).std_err;
    }
    else
    {
        r.batch_std_err = r.std_err;
    }
    return r;
}

MeasuredConstant measure_c0(const TransitionEngine& e, double rho)
{
    if (!(rho > 0 && rho < 1))
        throw DomainError("measure_c0: rho must lie in (0, 1)");
    MeasuredConstant c;
    c.value = -std::numeric_limits<double>::infinity();
    for (double u : e.time_grid())
    {
        double v = std::log(e.K((1 - rho) * u) / e.K(u)) / rho;
        if (v > c.value)
        {
            c.value = v;
            c.argmax = u;
        }
    }
    return c;
}

MeasuredConstant measure_C_A(const FreeEnergyTable& tab, double A, double eta)
{
    if (!(A > 1 && eta > 0 && eta < 0.5))
        throw DomainError("measure_C_A: need A > 1 and eta in (0, 1/2)");
    if (!(tab.F() > 0))
        throw DomainError("measure_C_A: needs F(beta) > 0");
    const auto& e = tab.engine();
    double T = A / tab.F(), len = (1 - eta) * T;
    // without disorder the block is int_0^len (len - t) z^c(t) dt
    auto n = std::size_t(std::max(2000.0, std::ceil(len / 0.01)));
    double dt = len / double(n);
    auto zc = constrained_annealed_direct(e, tab.beta(), len, dt);
    std::vector<double> w(zc.size());
    for (std::size_t k = 0; k < zc.size(); ++k)
        w[k] = (len - dt * double(k)) * zc[k] * ((k == 0 || k + 1 == zc.size()) ? 0.5 : 1.0);
    double z_hat = dt * pairwise_sum(w);
    double F = tab.F();
    const std::size_t m = 400;
    std::vector<double> lg(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
    {
        double v = len * double(k) / double(m);
        lg[k] = -F * v - std::log(tab.K_beta_bar(v));
    }
    // lg is not assumed monotone: scan every admissible pair
    double best = -std::numeric_limits<double>::infinity(), arg = 0;
    for (std::size_t a = 0; a <= m; ++a)
        for (std::size_t b = 0; a + b <= m; ++b)
            if (lg[a] + lg[b] > best)
            {
                best = lg[a] + lg[b];
                arg = len * double(a) / double(m);
            }
    double log_sqrt_c = F * len + best - std::log(z_hat * tab.F_prime());
    return {std::exp(2 * log_sqrt_c), arg};
}

}  // namespace rwpm
