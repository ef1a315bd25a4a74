#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rwpm
{
struct MeanErr
{
    double mean = 0;
    double std_err = 0;
};

// Pairwise summation in index order (result independent of thread count).
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x)
{
    return pairwise_sum(x.data(), x.size());
}

// Sample mean and standard error (n - 1 variance); std_err 0 for n < 2.
MeanErr mean_stderr(const std::vector<double>& x);

// Standard error from n_batches contiguous batch means.
double batch_means_stderr(const std::vector<double>& x, std::size_t n_batches = 20);

// Delete-one jackknife for fn(column means); columns share their length.
MeanErr jackknife(const std::vector<std::vector<double>>& columns,
                  const std::function<double(const std::vector<double>&)>& fn);

// E[z^2] / E[z]^2 with jackknife error.
MeanErr second_moment_ratio(const std::vector<double>& z);

struct KsResult
{
    double d = 0;
    double p_value = 1;
};

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

// Share of the largest term in a sum of nonnegative terms.
double max_share(const std::vector<double>& x);

}  // namespace rwpm
