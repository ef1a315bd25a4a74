#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rwpm
{
//---------------------------------------------------------------------------//
/*!
 * Seed plan.
 *
 * A task seed is derived from the master seed and the task index by
 * task_seed(m, i) = mix64(m ^ mix64(i + 0x632be59bd9b4e019)), where mix64 is
 * the splitmix64 finalizer. Every Monte Carlo sample, renewal pair or grid
 * cell is a task, so results do not depend on which worker ran it.
 */
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t task_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(master ^ mix64(index + 0x632be59bd9b4e019ull));
}

// Derive an independent sub-stream for a named purpose within a task.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t purpose)
{
    return mix64(seed + 0xd1b54a32d192ed03ull * (purpose + 1));
}

//---------------------------------------------------------------------------//
// 64-bit Mersenne twister with portable uniform/exponential draws.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform on (0, 1), never exactly 0 or 1.
    double uniform()
    {
        return (double(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Exponential with the given rate.
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire's multiply-shift with rejection
        unsigned __int128 m = (unsigned __int128)eng_() * n;
        std::uint64_t l = std::uint64_t(m);
        if (l < n)
        {
            std::uint64_t t = (0 - n) % n;
            while (l < t)
            {
                m = (unsigned __int128)eng_() * n;
                l = std::uint64_t(m);
            }
        }
        return std::uint64_t(m >> 64);
    }

    bool coin() { return (eng_() >> 63) != 0; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace rwpm
