#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>

namespace rwpm
{
// Bad input or a parameter outside the domain of an operation.
class DomainError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not reach its accuracy target.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Raised where beta0 is required but the walk is recurrent (beta0 = 0).
class RecurrentWalk : public DomainError
{
  public:
    RecurrentWalk() : DomainError("recurrent: beta0 = 0") {}
};

inline constexpr int kMaxDim = 8;

// Point of Z^d, d <= kMaxDim.
struct Site
{
    std::array<std::int64_t, kMaxDim> c{};
    int dim = 1;

    Site() = default;
    explicit Site(int d) : dim(d)
    {
        if (d < 1 || d > kMaxDim)
            throw DomainError("lattice dimension must be in [1, 8]");
    }
    static Site axis(int d, std::int64_t x)
    {
        Site s(d);
        s.c[0] = x;
        return s;
    }

    std::int64_t operator[](int i) const { return c[i]; }
    std::int64_t& operator[](int i) { return c[i]; }

    bool is_origin() const
    {
        for (int i = 0; i < dim; ++i)
            if (c[i] != 0)
                return false;
        return true;
    }
    std::int64_t l1() const
    {
        std::int64_t s = 0;
        for (int i = 0; i < dim; ++i)
            s += std::llabs(c[i]);
        return s;
    }
    double norm2() const
    {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            s += double(c[i]) * double(c[i]);
        return s;
    }

    friend Site operator+(Site a, const Site& b)
    {
        for (int i = 0; i < a.dim; ++i)
            a.c[i] += b.c[i];
        return a;
    }
    friend Site operator-(Site a, const Site& b)
    {
        for (int i = 0; i < a.dim; ++i)
            a.c[i] -= b.c[i];
        return a;
    }
    friend Site operator-(Site a)
    {
        for (int i = 0; i < a.dim; ++i)
            a.c[i] = -a.c[i];
        return a;
    }
    friend bool operator==(const Site& a, const Site& b)
    {
        if (a.dim != b.dim)
            return false;
        for (int i = 0; i < a.dim; ++i)
            if (a.c[i] != b.c[i])
                return false;
        return true;
    }

    std::string str() const;
};

struct SiteHash
{
    std::size_t operator()(const Site& s) const noexcept
    {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ std::uint64_t(s.dim);
        for (int i = 0; i < s.dim; ++i)
        {
            h ^= std::uint64_t(s.c[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return std::size_t(h);
    }
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace rwpm
