#pragma once

// Truncated Taylor series arithmetic: a[k] = f^{(k)}(x0) / k!.

#include <array>
#include <cmath>

namespace rwpm::detail
{
template<int N>
struct Jet
{
    std::array<double, N> a{};

    static Jet variable(double x0)
    {
        Jet j;
        j.a[0] = x0;
        if (N > 1)
            j.a[1] = 1;
        return j;
    }
    static Jet constant(double c)
    {
        Jet j;
        j.a[0] = c;
        return j;
    }

    // k-th derivative
    double deriv(int k) const
    {
        double f = 1;
        for (int i = 2; i <= k; ++i)
            f *= i;
        return a[k] * f;
    }

    friend Jet operator+(Jet x, const Jet& y)
    {
        for (int k = 0; k < N; ++k)
            x.a[k] += y.a[k];
        return x;
    }
    friend Jet operator-(Jet x, const Jet& y)
    {
        for (int k = 0; k < N; ++k)
            x.a[k] -= y.a[k];
        return x;
    }
    friend Jet operator*(double s, Jet x)
    {
        for (auto& v : x.a)
            v *= s;
        return x;
    }
    friend Jet operator+(double s, Jet x)
    {
        x.a[0] += s;
        return x;
    }
    friend Jet operator*(const Jet& x, const Jet& y)
    {
        Jet r;
        for (int k = 0; k < N; ++k)
        {
            double s = 0;
            for (int i = 0; i <= k; ++i)
                s += x.a[i] * y.a[k - i];
            r.a[k] = s;
        }
        return r;
    }
};

template<int N>
Jet<N> exp(const Jet<N>& x)
{
    Jet<N> e;
    e.a[0] = std::exp(x.a[0]);
    for (int k = 1; k < N; ++k)
    {
        double s = 0;
        for (int j = 1; j <= k; ++j)
            s += j * x.a[j] * e.a[k - j];
        e.a[k] = s / k;
    }
    return e;
}

template<int N>
Jet<N> log(const Jet<N>& x)
{
    Jet<N> l;
    l.a[0] = std::log(x.a[0]);
    for (int k = 1; k < N; ++k)
    {
        double s = 0;
        for (int j = 1; j < k; ++j)
            s += j * l.a[j] * x.a[k - j];
        l.a[k] = (x.a[k] - s / k) / x.a[0];
    }
    return l;
}

template<int N>
Jet<N> pow(const Jet<N>& x, double p)
{
    return exp(p * log(x));
}

// Joint sine/cosine.
template<int N>
void sincos(const Jet<N>& x, Jet<N>& s, Jet<N>& c)
{
    s = Jet<N>();
    c = Jet<N>();
    s.a[0] = std::sin(x.a[0]);
    c.a[0] = std::cos(x.a[0]);
    for (int k = 1; k < N; ++k)
    {
        double ss = 0, cc = 0;
        for (int j = 1; j <= k; ++j)
        {
            ss += j * x.a[j] * c.a[k - j];
            cc += j * x.a[j] * s.a[k - j];
        }
        s.a[k] = ss / k;
        c.a[k] = -cc / k;
    }
}

}  // namespace rwpm::detail
