#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/homogeneous.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/stats.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
// Pairs of independent stationary tilted renewals on [0, T], T = A / F(beta).
struct MomentExperiment
{
    const FreeEnergyTable* table = nullptr;
    double A = 4;
    double eta = 0.25;
    // dyadic: 1, 2, 4, ...
    std::vector<double> h_list;
    std::size_t n_pairs = 1000;
    std::uint64_t seed = 1;
    int workers = 1;

    double T() const;
    // Throws DomainError.
    void validate() const;
};

// Dyadic list 1, 2, 4, ... up to the first H with 2H >= T.
std::vector<double> dyadic_h_list(double T);

struct PairRecord
{
    long j1 = 0, j2 = 0, frak_j = 0, frak_j_prime = 0;
    // N_H in the order of the experiment's h_list
    std::vector<long> n_h;
    // D_T and max{j : T_j <= T}; filled when overshoots were requested
    long D = -1;
    long count_to_T = 0;
    bool truncated = false;
};

// Pair i uses task_seed(seed, i) for both renewals.
std::vector<PairRecord> sample_pairs(const MomentExperiment& exp, bool with_overshoots = false);

struct LaplaceEstimate
{
    double u = 0;
    double mean = 0;
    double std_err = 0;
    double batch_std_err = 0;
    // largest single term over the sum
    double max_share = 0;
    bool unreliable = false;
};

// Mean of e^{u x_i} - 1 with the heavy-tail diagnostic (share > 10%).
LaplaceEstimate exp_moment(const std::vector<long>& x, double u);

// e^{u |frak J_[0,T]|} - 1
LaplaceEstimate overlap_laplace(const std::vector<PairRecord>& pairs, double u);
LaplaceEstimate overlap_laplace(const MomentExperiment& exp, double u);

// prod_k (mean e^{u p_k N_{H_k}})^{1/p_k} - 1, p_k = r^{k+1}/(r - 1); an upper
// bound for the mean of e^{u |frak J|} - 1 by Hoelder (sum 1/p_k <= 1). Needs
// the H list to cover every gap, which is checked pair by pair.
double holder_split(const std::vector<PairRecord>& pairs, double u, double r = 2);

// e^{u D_T} - 1
LaplaceEstimate dt_laplace(const std::vector<PairRecord>& pairs, double u);
// Largest u on the (increasing) grid whose estimate stays <= target; 0 if none.
double dt_threshold(const std::vector<PairRecord>& pairs, double target,
                    const std::vector<double>& u_grid);

struct NhTail
{
    double H = 0;
    // P(N_H >= k), k = 1..k_max
    std::vector<double> tail;
    double mean = 0;
    // sum of the tail over every observed k
    double tail_sum = 0;
    // 1 - exp(slope) from a least-squares fit of log tail(k) against k
    double rate = 0;
    // (H/T)^{2 alpha - 1}, or 1 / psi_H(T) when alpha = 1/2
    double reference = 0;
};

// k_max = 0 picks the largest k with at least 20 pairs in the tail. Throws
// DomainError when tail(k_max) is empty.
NhTail nh_tail(const MomentExperiment& exp, const std::vector<PairRecord>& pairs, double H,
               std::size_t k_max = 0);

struct OvershootMoment
{
    double v = 0;
    double mean = 0;
    double std_err = 0;
    std::size_t accepted = 0;
};

// E[(S_2/S_1)^{-kappa} | S_1 in v (1 +- eps_w)] by rejection. Throws
// DomainError with fewer than 10 accepted pairs in a window.
std::vector<OvershootMoment> overshoot_ratio_moment(const MomentExperiment& exp, double kappa,
                                                   const std::vector<double>& v_list,
                                                   double eps_w = 0.05);

//---------------------------------------------------------------------------//
struct MomentRatio
{
    double ratio = 1;
    double std_err = 0;
    double batch_std_err = 0;
    double T = 0;
    std::vector<double> log_z;
};

// E[Z1^2] / E[Z1]^2 over n_disorder paths, Z1 the block partition function on
// [eta T, T] with T = A / F(beta) and T / steps grid spacing.
MomentRatio moment_ratio_direct(const TransitionEngine& e, double beta, double A, double eta,
                                std::size_t steps, double rho, std::size_t n_disorder,
                                std::uint64_t seed, int workers = 1);

struct MeasuredConstant
{
    double value = 0;
    double argmax = 0;
};

// sup_u log(K((1 - rho) u) / K(u)) / rho over the engine grid.
MeasuredConstant measure_c0(const TransitionEngine& e, double rho);

// Square of the sup of the density ratio between the block law and the
// stationary law over the end distances v1 = t_1 - eta T, v2 = T - t_k.
MeasuredConstant measure_C_A(const FreeEnergyTable& tab, double A, double eta);

}  // namespace rwpm
