#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rwpm/homogeneous.hpp"
#include "rwpm/rng.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
/*!
 * Renewal points on [0, horizon].
 *
 * Pinned samples start at 0; stationary samples start at the delayed first
 * point. `next` is the first point beyond the horizon, and the generator
 * state is kept so the sample can be extended later with the same draws it
 * would have produced in one go.
 */
struct RenewalSample
{
    enum class Law
    {
        pinned,
        stationary
    };
    Law law = Law::pinned;
    double horizon = 0;
    std::vector<double> points;
    double next = 0;
    Rng rng{0};

    // "# law horizon" header, then one time per line.
    std::string to_text() const;
};

/*!
 * Sampler for gaps with density K_beta.
 *
 * Survival functions are inverted on the engine's time grid: log S is cubic
 * Hermite in log t with the exact slope -t K_beta / S, a cubic in t covers
 * [0, t_min], and the power-law-times-exponential tail past the grid end is
 * inverted through the incomplete gamma function.
 */
class RenewalLaw
{
  public:
    explicit RenewalLaw(const FreeEnergyTable& tab);

    const FreeEnergyTable& table() const { return *tab_; }

    // Gap with density K_beta.
    double sample_gap(Rng& rng) const;
    // Gap with density t K_beta(t) / mean (size-biased).
    double sample_size_biased(Rng& rng) const;
    // First point of the stationary version, density K_beta_bar / mean.
    double sample_delay(Rng& rng) const;
    // P(gap > t) as used by the sampler.
    double survival(double t) const;

    RenewalSample sample_pinned(double T, Rng& rng) const;
    RenewalSample sample_stationary(double T, Rng& rng) const;
    // Continue sampling up to the new horizon.
    void extend(RenewalSample& s, double T) const;

  private:
    struct Inverter
    {
        std::vector<double> logt, logS, slope;
        // G = 1 - S on [0, t0] as a cubic with end slopes g0, g1
        double head_mass = 0, g0 = 0, g1 = 0, t0 = 0;
        int moment = 0;
        double norm = 1;
    };
    double invert(const Inverter& inv, double u) const;
    double tail_survival(double t, int moment) const;

    const FreeEnergyTable* tab_;
    Inverter gap_, sized_;
};

//---------------------------------------------------------------------------//
struct OverlapStats
{
    long j1 = 0, j2 = 0;
    long frak_j = 0, frak_j_prime = 0;
    // N_H for each requested H: gaps in (H, 2H], with (0, 2] for H = 1.
    std::map<double, long> n_h;
};

// Counts over the renewal intervals of tau (and tau') contained in [a, b].
// The initial interval [0, tau_1] of a pinned sample is not a renewal
// interval of the process and is skipped. Halves are closed.
OverlapStats overlap_stats(const std::vector<double>& tau, const std::vector<double>& tau_p,
                           double a, double b, const std::vector<double>& h_list = {},
                           bool skip_first = true);
OverlapStats overlap_stats(const RenewalSample& tau, const RenewalSample& tau_p, double a,
                           double b, const std::vector<double>& h_list = {});

struct OvershootTrace
{
    // T_{-1}, T_0, T_1, ...
    std::vector<double> T;
    // S_0, S_1, ... with S_j = T_j - T_{j-1}
    std::vector<double> S;
    long D = -1;  // first j >= 1 with S_j >= horizon; -1 if not reached
    bool truncated = false;
    bool t0_in_tau = true;  // T_0 = tau_1 (tau'_1 <= tau_1); else T_0 = tau'_1

    double t_at(long j) const { return T[std::size_t(j + 1)]; }
    // max{j >= 0 : T_j <= t}, 0 when T_0 > t
    long count_up_to(double t) const;
};

/*!
 * Iterated overshoots between two point sets. Each T_j is taken among the
 * points of its process with index beyond the one used last, which settles
 * ties; for continuous laws this is the plain alternating infimum.
 * `first`/`first_p` are the indices of tau_1 and tau'_1.
 */
OvershootTrace iterated_overshoots(const std::vector<double>& tau,
                                   const std::vector<double>& tau_p, double T,
                                   std::size_t first = 1, std::size_t first_p = 1);
// Extends both samples (horizon doubling) until D_T is reached.
OvershootTrace iterated_overshoots(const RenewalLaw& law, RenewalSample& tau,
                                   RenewalSample& tau_p, double T, int max_doublings = 20);

//---------------------------------------------------------------------------//
using SlowFunction = std::function<double(double)>;

// psi_H(T) = int_{H/2}^T L(H)^2 / L(s)^2 ds / s
double psi_H(const SlowFunction& L, double H, double T);
// R(t) = int int_{1 < u < s < t} L(u)^2 / L(s)^2 du/u ds/s
double R_function(const SlowFunction& L, double t);
// L(t) = K(t) t^{1 + alpha} from an engine.
SlowFunction slow_part(const TransitionEngine& e);

// Limit of E[(S_2/S_1)^{-kappa} | S_1 = v] as v -> inf, from the double
// integral of the limiting overshoot density (adaptive quadrature).
double overshoot_limit_quadrature(double alpha, double kappa);

}  // namespace rwpm
