#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace rwpm
{
// Gauss-Legendre rule on [-1, 1].
struct GaussRule
{
    std::vector<double> x;
    std::vector<double> w;
};

// Cached rule with n nodes (n >= 1).
const GaussRule& gauss_legendre(int n);

// Integrate f over [a, b] with a single n-point panel.
template<class F>
double gauss_panel(F&& f, double a, double b, int n)
{
    const GaussRule& r = gauss_legendre(n);
    double h = 0.5 * (b - a), m = 0.5 * (a + b), s = 0;
    for (std::size_t i = 0; i < r.x.size(); ++i)
        s += r.w[i] * f(m + h * r.x[i]);
    return s * h;
}

// Composite rule over [a, b] with `panels` equal panels.
template<class F>
double gauss_composite(F&& f, double a, double b, int panels, int n)
{
    double s = 0, h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        s += gauss_panel(f, a + p * h, a + (p + 1) * h, n);
    return s;
}

// int_X^inf e^{-B x} x^{-s} dx (incomplete gamma); +inf when divergent.
double power_exp_tail(double s, double B, double X);

// Neumaier-compensated running sum.
class KahanSum
{
  public:
    void add(double v)
    {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            c_ += (sum_ - t) + v;
        else
            c_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

  private:
    double sum_ = 0, c_ = 0;
};

}  // namespace rwpm
