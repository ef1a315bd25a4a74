#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rwpm/common.hpp"
#include "rwpm/kernel.hpp"
#include "rwpm/rng.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
// One quenched trajectory Y on [0, T]: event times and the position after each.
struct DisorderPath
{
    double rate = 0;
    double horizon = 0;
    int dim = 1;
    std::vector<double> times;
    std::vector<Site> positions;

    Site origin() const { return Site(dim); }
    // Position at time t (right-continuous).
    Site at(double t) const;
    // Positions at the grid times k * dt, k = 0..n.
    std::vector<Site> on_grid(double dt, std::size_t n) const;
    std::size_t jumps() const { return times.size(); }
    std::uint64_t hash() const;

    // "time position" lines after a "# rho T seed" header.
    std::string to_text(std::uint64_t seed) const;
    static DisorderPath from_text(const std::string& text);
};

//---------------------------------------------------------------------------//
struct EngineOptions
{
    double t_min = 1e-3;
    double t_max = 1e7;
    int per_decade = 64;
    // Big-jump switch radius in units of 1/K(t).
    double y_switch = 5;
};

/*!
 * Transition probabilities of the continuous-time walk with rate-1 jumps.
 *
 * Nearest-neighbour walks use products of scaled Bessel functions. Stable
 * kernels use a fixed set of Fourier nodes in log(xi) on which q is
 * tabulated once; every return-probability integral is a weighted node sum,
 * and oscillatory integrals for large |y| switch to half-period panels with
 * q interpolated inside each log panel. K(t) = beta0 P(W_t = 0) is cached on
 * a geometric time grid and interpolated by cubic Hermite in log-log with
 * exact slopes. Immutable after construction apart from internal caches,
 * which are guarded; safe to share between threads.
 */
class TransitionEngine
{
  public:
    explicit TransitionEngine(JumpKernel kernel, EngineOptions opts = {});
    ~TransitionEngine();
    TransitionEngine(const TransitionEngine&) = delete;
    TransitionEngine& operator=(const TransitionEngine&) = delete;

    const JumpKernel& kernel() const { return kernel_; }
    const EngineOptions& options() const { return opts_; }
    int dim() const { return kernel_.dim(); }
    double alpha() const { return kernel_.alpha(); }
    bool transient() const { return kernel_.transient(); }

    // Throws RecurrentWalk for recurrent kernels.
    double beta0() const;

    // P(W_t = 0) and its time derivative.
    double return_prob(double t) const;
    double return_prob_derivative(double t) const;
    double transition_prob(double t, const Site& y) const;
    double transition_prob(double t, std::int64_t y) const
    {
        return transition_prob(t, Site::axis(dim(), y));
    }
    // P(W_{k dt} = y) for k = 0..n.
    std::vector<double> transition_lags(const Site& y, double dt, std::size_t n) const;

    // K(t) = beta0 P(W_t = 0) and derivatives.
    double K(double t) const;
    double K_prime(double t) const;
    double k_prime_ratio(double t) const;
    const std::vector<double>& time_grid() const { return grid_; }
    const std::vector<double>& K_table() const { return k_tab_; }

    // int_0^inf e^{-bt} P(W_t = 0) dt and int_0^inf t e^{-bt} P(W_t = 0) dt.
    double laplace(double b) const;
    double laplace_moment(double b) const;

    // LLT limit profile and residual sup_y |beta0 P(W_t=y)/K(t) - g|.
    double llt_profile(double t, const Site& y) const;
    double llt_residual(double t, const std::vector<Site>& ys) const;

    DisorderPath simulate_path(double rho, double T, Rng& rng) const;

    // Number of Fourier nodes (stable kernels) for diagnostics.
    std::size_t fourier_nodes() const;

    struct Backend;

  private:
    double kscale(double t) const;
    double big_jump_factor(double t) const;
    double interp_logK(double t, double* slope) const;

    JumpKernel kernel_;
    EngineOptions opts_;
    std::unique_ptr<Backend> be_;
    double beta0_ = 0;
    std::vector<double> grid_, k_tab_, slope_tab_, p_tab_;
    double log_t0_ = 0, dlog_ = 0;
    mutable std::mutex bj_mutex_;
    mutable std::vector<double> bj_c_;
};

// Density ratio s(z)/s(0) of the standard symmetric gamma-stable law with
// characteristic function exp(-|theta|^gamma).
double stable_density_ratio(double gamma, double z);

}  // namespace rwpm
