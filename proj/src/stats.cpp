#include "rwpm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rwpm/common.hpp"

namespace rwpm
{
double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 16)
    {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

MeanErr mean_stderr(const std::vector<double>& x)
{
    MeanErr r;
    if (x.empty())
        throw DomainError("mean_stderr: empty sample");
    double n = double(x.size());
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }))
    {
        r.mean = x[0];
        return r;
    }
    r.mean = pairwise_sum(x) / n;
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = (x[i] - r.mean) * (x[i] - r.mean);
    r.std_err = std::sqrt(pairwise_sum(d) / (n - 1) / n);
    return r;
}

double batch_means_stderr(const std::vector<double>& x, std::size_t n_batches)
{
    if (n_batches < 2 || x.size() < n_batches)
        throw DomainError("batch_means_stderr: need at least n_batches >= 2 samples");
    std::size_t b = x.size() / n_batches;
    std::vector<double> means(n_batches);
    for (std::size_t k = 0; k < n_batches; ++k)
        means[k] = pairwise_sum(x.data() + k * b, b) / double(b);
    return mean_stderr(means).std_err;
}

MeanErr jackknife(const std::vector<std::vector<double>>& columns,
                  const std::function<double(const std::vector<double>&)>& fn)
{
    if (columns.empty() || columns[0].size() < 2)
        throw DomainError("jackknife: need at least two rows");
    std::size_t n = columns[0].size(), m = columns.size();
    std::vector<double> sums(m);
    for (std::size_t c = 0; c < m; ++c)
    {
        if (columns[c].size() != n)
            throw DomainError("jackknife: ragged columns");
        sums[c] = pairwise_sum(columns[c]);
    }
    std::vector<double> means(m), loo(n);
    for (std::size_t c = 0; c < m; ++c)
        means[c] = sums[c] / double(n);
    double full = fn(means);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t c = 0; c < m; ++c)
            means[c] = (sums[c] - columns[c][i]) / double(n - 1);
        loo[i] = fn(means);
    }
    double lbar = pairwise_sum(loo) / double(n), v = 0;
    for (double l : loo)
        v += (l - lbar) * (l - lbar);
    MeanErr r;
    // bias-corrected estimate
    r.mean = double(n) * full - double(n - 1) * lbar;
    r.std_err = std::sqrt(v * double(n - 1) / double(n));
    return r;
}

MeanErr second_moment_ratio(const std::vector<double>& z)
{
    if (!z.empty() && std::all_of(z.begin(), z.end(), [&](double v) { return v == z[0]; }))
        return {1.0, 0.0};
    std::vector<double> z2(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z2[i] = z[i] * z[i];
    return jackknife({z, z2}, [](const std::vector<double>& m) { return m[1] / (m[0] * m[0]); });
}

namespace
{
// P(K > x) for the Kolmogorov distribution
double kolmogorov_q(double x)
{
    if (x < 0.2)
        return 1.0;
    double s = 0;
    for (int k = 1; k < 200; ++k)
    {
        double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 2 : -2) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}
}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double na = double(a.size()), nb = double(b.size()), d = 0;
    while (i < a.size() && j < b.size())
    {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    double ne = na * nb / (na + nb), sq = std::sqrt(ne);
    KsResult r;
    r.d = d;
    r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf)
{
    if (a.empty())
        throw DomainError("ks_one_sample: empty sample");
    std::sort(a.begin(), a.end());
    double n = double(a.size()), d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        double f = cdf(a[i]);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    double sq = std::sqrt(n);
    KsResult r;
    r.d = d;
    r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

double max_share(const std::vector<double>& x)
{
    double s = pairwise_sum(x), m = 0;
    for (double v : x)
        m = std::max(m, v);
    return s > 0 ? m / s : 0.0;
}

}  // namespace rwpm
