#pragma once

#include <vector>

#include "rwpm/walk.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
// F(beta): the b > 0 with beta * int e^{-bt} P(W_t = 0) dt = 1, or 0 if none.
double solve_free_energy(const TransitionEngine& e, double beta);

struct ExponentFit
{
    double nu = 0;
    double log_prefactor = 0;
    double r2 = 0;
    std::vector<double> dbeta, F;
};

// Least-squares slope of log F against log(beta - beta0); beta0 = 0 when recurrent.
ExponentFit critical_exponent_fit(const TransitionEngine& e, const std::vector<double>& betas);

// Geometric grid beta0 (1 + x), x from lo to hi, n points; x itself when beta0 = 0.
std::vector<double> beta_grid_near_critical(const TransitionEngine& e, double lo, double hi,
                                            int n);

//---------------------------------------------------------------------------//
/*!
 * Homogeneous model at fixed beta >= beta0.
 *
 * K_beta(t) = (beta/beta0) e^{-F t} K(t) = beta e^{-F t} P(W_t = 0). Tail
 * integrals of K_beta and t K_beta are tabulated on the engine's time grid
 * (Gauss panels in time, incomplete-gamma tail past the grid end), which
 * gives a time-domain normalization check independent of the Laplace
 * transform that defines F. Renewal densities are filled on demand.
 */
class FreeEnergyTable
{
  public:
    FreeEnergyTable(const TransitionEngine& e, double beta);

    const TransitionEngine& engine() const { return *e_; }
    double beta() const { return beta_; }
    double F() const { return F_; }
    // dF/dbeta = 1 / (beta int t K_beta); 0 below beta0.
    double F_prime() const { return F_prime_; }
    // int t K_beta (Laplace side); +inf when infinite.
    double mean_gap() const { return mean_; }
    // Renewal intensity 1 / mean_gap.
    double intensity() const { return 1 / mean_; }

    double K_beta(double t) const;
    // int_t^inf K_beta and int_t^inf s K_beta(s) ds
    double K_beta_bar(double t) const;
    double K_beta_bar_moment(double t) const;
    // Time-domain int K_beta and int t K_beta.
    double mass_time_domain() const { return mass_td_; }
    double mean_time_domain() const { return mean_td_; }

    // Tables on the engine grid, used by the renewal samplers.
    const std::vector<double>& grid() const { return e_->time_grid(); }
    const std::vector<double>& bar_table() const { return bar_; }
    const std::vector<double>& bar_moment_table() const { return bar1_; }
    // Power-law exponent of P past the grid end.
    double tail_exponent() const { return tail_sigma_; }

    // Solve u (beta0 kernel) and u_beta on the uniform grid k delta up to t_end.
    void solve_renewal(double t_end, double delta);
    bool has_renewal() const { return !u_beta_.empty(); }
    double delta() const { return delta_; }
    const std::vector<double>& u_table() const { return u_; }
    const std::vector<double>& u_beta_table() const { return u_beta_; }
    // Linear interpolation; u_beta is extended by 1/mean_gap past the grid
    // end once it has settled there, otherwise DomainError.
    double u(double t) const;
    double u_beta(double t) const;

  private:
    double head_integral(int moment) const;
    double tail_integral(double t, int moment) const;

    const TransitionEngine* e_;
    double beta_, F_ = 0, F_prime_ = 0, mean_ = 0;
    double tail_sigma_ = 0, p_end_ = 0;
    std::vector<double> bar_, bar1_;
    double mass_td_ = 0, mean_td_ = 0;
    double delta_ = 0;
    std::vector<double> u_, u_beta_;
};

// u_beta on t_k = k delta, k = 0..round(t_end/delta), by the trapezoidal
// Volterra solver. DomainError when delta does not resolve K_beta near 0.
std::vector<double> renewal_density(const TransitionEngine& e, double beta, double t_end,
                                    double delta);

// Step used by default for the Volterra grids: min(0.01, 0.01 / F).
double default_delta(double F);

// z^c_{beta,T} = u_beta(T) e^{F T} from a solved table.
double constrained_annealed_partition(const FreeEnergyTable& tab, double T);

// z^c_{beta,t} on t_k = k delta from z^c = beta P + beta P * z^c directly.
std::vector<double> constrained_annealed_direct(const TransitionEngine& e, double beta,
                                                double T, double delta);

// Free annealed partition z_{beta,t} on t_k = k delta from
// z(t) = 1 + int_0^t beta P(s) z(t - s) ds (first-contact decomposition).
std::vector<double> free_annealed_partition(const TransitionEngine& e, double beta, double T,
                                            double delta);

// 1 + int_0^T z^c dt by the trapezoidal rule on a z^c grid.
double free_from_constrained(const std::vector<double>& zc, double delta);

struct SandwichResult
{
    double min_ratio = 0, max_ratio = 0;
    // u_beta / u over t <= eta / F
    double near_min = 0, near_max = 0;
    double eta = 0;
};

// Extremes of u_beta(t) / u(min(t, 1/F)) over t_grid, and of u_beta / u for
// t <= eta / F. Needs solve_renewal up to max(t_grid).
SandwichResult sandwich_check(const FreeEnergyTable& tab, const std::vector<double>& t_grid,
                              double eta);

}  // namespace rwpm
