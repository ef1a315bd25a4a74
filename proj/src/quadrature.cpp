#include "rwpm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <map>
#include <memory>
#include <mutex>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include "rwpm/common.hpp"

namespace rwpm
{
const GaussRule& gauss_legendre(int n)
{
    static std::mutex m;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& slot = cache[n];
    if (!slot)
    {
        auto rule = std::make_unique<GaussRule>();
        gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
        rule->x.resize(n);
        rule->w.resize(n);
        for (int i = 0; i < n; ++i)
            gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->x[i], &rule->w[i], t);
        gsl_integration_glfixed_table_free(t);
        // ascending order (barycentric interpolation relies on it)
        std::vector<std::size_t> idx(n);
        for (int i = 0; i < n; ++i)
            idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return rule->x[a] < rule->x[b]; });
        GaussRule sorted;
        for (auto i : idx)
        {
            sorted.x.push_back(rule->x[i]);
            sorted.w.push_back(rule->w[i]);
        }
        *rule = std::move(sorted);
        slot = std::move(rule);
    }
    return *slot;
}

double power_exp_tail(double s, double B, double X)
{
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    if (B * X < 1e-30)
    {
        if (s <= 1)
            return std::numeric_limits<double>::infinity();
        return std::pow(X, 1 - s) / (s - 1);
    }
    if (B * X > 700)
        return 0.0;
    gsl_sf_result r;
    int status = gsl_sf_gamma_inc_e(1 - s, B * X, &r);
    if (status == GSL_EUNDRFLW)
        return 0.0;
    if (status != GSL_SUCCESS)
        throw NumericalError(std::string("incomplete gamma failed: ") + gsl_strerror(status));
    return std::pow(B, s - 1) * r.val;
}

}  // namespace rwpm
