#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rwpm/common.hpp"
#include "rwpm/rng.hpp"

namespace rwpm
{
//---------------------------------------------------------------------------//
// Slowly varying factor phi(r) = (log(e + r))^kappa; kappa = 0 is constant.
struct PhiSpec
{
    enum class Family
    {
        constant,
        log_power
    };
    Family family = Family::constant;
    double kappa = 0;

    static PhiSpec constant() { return {}; }
    static PhiSpec log_power(double kappa) { return {Family::log_power, kappa}; }

    double operator()(double r) const;
    // Effective exponent (zero for the constant family).
    double exponent() const { return family == Family::log_power ? kappa : 0.0; }
};

//---------------------------------------------------------------------------//
/*!
 * Symmetric lattice jump distribution J.
 *
 * Either the nearest-neighbour walk on Z^d or the one-dimensional kernel
 * J(x) = c phi(|x|) (1 + |x|)^{-(1+gamma)}. The latter is tabulated up to the
 * truncation radius R; mass beyond R is an Euler-Maclaurin tail built on the
 * integral of the profile. Immutable and cheap to copy.
 */
class JumpKernel
{
  public:
    enum class Variant
    {
        srw,
        stable
    };

    Variant variant() const { return variant_; }
    bool is_srw() const { return variant_ == Variant::srw; }
    int dim() const { return dim_; }
    double gamma() const { return gamma_; }
    const PhiSpec& phi() const { return phi_; }
    double normalization() const { return c_; }
    std::int64_t truncation_radius() const { return radius_; }

    // Tail exponent of K: d/2 - 1 or (1 - gamma)/gamma.
    double alpha() const;
    // beta0 > 0 iff the walk is transient.
    bool transient() const;

    double prob(const Site& x) const;
    double prob(std::int64_t x) const { return prob(Site::axis(dim_, x)); }
    double zero_mass() const { return is_srw() ? 0.0 : c_; }

    // q(xi) = sum_x J(x) (1 - cos <xi, x>)
    double char_exponent(const std::vector<double>& xi) const;
    double char_exponent(double xi) const;

    Site sample_jump(Rng& rng) const;
    // Jump conditioned to be nonzero.
    Site sample_nonzero_jump(Rng& rng) const;

    // Unnormalized stable profile f(r) = phi(r)(1+r)^{-(1+gamma)}.
    double profile(double r) const;
    // Integral of the profile over [r0, inf).
    double profile_tail_integral(double r0) const;
    // P(|X| > n) for the stable kernel.
    double tail_mass(std::int64_t n) const;
    // Bound on the Euler-Maclaurin remainder used for the mass beyond R.
    double tail_error_bound() const { return tail_error_; }
    // |1 - sum_x J(x)| as evaluated from the table and the tail.
    double normalization_residual() const { return norm_residual_; }

    std::string describe() const;

  private:
    friend JumpKernel make_srw_kernel(int d);
    friend JumpKernel
    make_stable_kernel(double gamma, PhiSpec phi, std::int64_t truncation_radius);

    struct Table;

    double stable_q(double xi) const;
    std::int64_t sample_abs(double u) const;

    Variant variant_ = Variant::srw;
    int dim_ = 1;
    double gamma_ = 0;
    PhiSpec phi_;
    double c_ = 1;
    std::int64_t radius_ = 0;
    double tail_error_ = 0;
    double norm_residual_ = 0;
    std::shared_ptr<const Table> table_;
};

JumpKernel make_srw_kernel(int d);
JumpKernel make_stable_kernel(double gamma,
                              PhiSpec phi = PhiSpec::constant(),
                              std::int64_t truncation_radius = 1'000'000);

// c_gamma = int_R |s|^{-(1+gamma)}(1 - cos s) ds in closed form.
double stable_constant(double gamma);

}  // namespace rwpm
