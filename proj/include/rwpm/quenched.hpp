#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "rwpm/homogeneous.hpp"
#include "rwpm/walk.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
// X jumps at rate 1 - rho, Y at rate rho; the engine is the rate-1 walk.
struct QuenchedSolveSpec
{
    double rho = 0;
    double beta = 0;
    double T = 1;
    double delta = 0.01;
    const TransitionEngine* engine = nullptr;

    // Throws DomainError; delta must divide T up to 1e-9 relative.
    void validate() const;
    std::size_t steps() const;
};

struct PartitionEstimate
{
    double log_zc = 0;
    double log_z = 0;
    // two Y jumps snapped to one grid node
    bool grid_error_flag = false;
    std::uint64_t seed = 0;
    std::uint64_t path_hash = 0;
};

// K_w(s, t, Y) = beta0 P(X_{t-s} = Y_t - Y_s), exact times.
double kw(const QuenchedSolveSpec& spec, double s, double t, const DisorderPath& Y);
// K_w(s, t, Y) / K(t - s)
double w_weight(const QuenchedSolveSpec& spec, double s, double t, const DisorderPath& Y);

/*!
 * Grid solver for one disorder path at a time.
 *
 * Z^c(t) = beta [P_w(0,t) + int_0^t Z^c(s) P_w(s,t) ds] with
 * P_w(s,t) = P(X_{t-s} = Y_t - Y_s) is discretized by the trapezoidal rule
 * on t_k = k delta, Y being snapped to the nearest node. Lag vectors
 * P(X_{k delta} = d), k = 0..n, are cached per displacement d; Y is piecewise
 * constant, so a path touches few displacements. Values are carried as
 * W_k e^{L} with L raised whenever W grows past 1e150. One solver per
 * worker thread.
 */
class QuenchedSolver
{
  public:
    explicit QuenchedSolver(const QuenchedSolveSpec& spec, std::size_t cache_entries = 512);

    const QuenchedSolveSpec& spec() const { return spec_; }

    // Positions at the grid nodes, jumps snapped to the nearest node (>= 1).
    std::vector<Site> snap(const DisorderPath& Y, bool* collided = nullptr) const;

    // log Z^c on [k0 delta, k delta] for k = k0..n (first entry log beta), and the
    // free log Z on [k0 delta, n delta].
    std::vector<double> sweep(const std::vector<Site>& y, std::size_t k0, double* log_z);

    PartitionEstimate solve(const DisorderPath& Y, std::uint64_t seed = 0);

    // log of K(T) int int_{eta T < r < s < T} Z^c_{[r,s]} dr ds, from the single
    // Volterra equation satisfied by G(s) = int_{eta T}^s Z^c_{[r,s]} dr.
    double log_block_hat_Z(const DisorderPath& Y, double eta);

    // P(X_{k delta} = d), k = 0..n
    const std::vector<double>& lags(const Site& d);

    std::size_t cache_misses() const { return misses_; }

  private:
    QuenchedSolveSpec spec_;
    std::size_t n_;
    std::size_t cap_;
    std::size_t misses_ = 0;
    std::list<Site> lru_;
    struct Entry
    {
        std::vector<double> v;
        std::list<Site>::iterator pos;
    };
    std::unordered_map<Site, Entry, SiteHash> cache_;
};

PartitionEstimate constrained_quenched_partition(const QuenchedSolveSpec& spec,
                                                 const DisorderPath& Y);

struct McEstimate
{
    double mean = 0;
    double std_err = 0;
    std::vector<double> values;
};

// One solve per path; path i uses task_seed(seed, i).
std::vector<PartitionEstimate> quenched_partition_samples(const QuenchedSolveSpec& spec,
                                                          std::size_t n_samples,
                                                          std::uint64_t seed, int workers = 1);

// (1/T) log Z^{Y,c} over n_samples paths; path i uses task_seed(seed, i).
McEstimate quenched_free_energy_estimate(const QuenchedSolveSpec& spec, std::size_t n_samples,
                                         std::uint64_t seed, int workers = 1);

// E[log w(0, t, Y)] for each t; path i uses task_seed(seed, i).
std::vector<McEstimate> log_w_expectation(const QuenchedSolveSpec& spec,
                                          const std::vector<double>& t_grid,
                                          std::size_t n_samples, std::uint64_t seed,
                                          int workers = 1);

// Spec with T = A / F(beta) and delta = T / steps.
QuenchedSolveSpec block_spec(const TransitionEngine& e, double rho, double beta, double A,
                             std::size_t steps);

double block_hat_Z(const QuenchedSolveSpec& spec, const DisorderPath& Y, double eta);

}  // namespace rwpm
