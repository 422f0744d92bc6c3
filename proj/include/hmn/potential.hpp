#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

#include "hmn/model.hpp"

namespace hmn {

inline constexpr double kNegativeInfinity =
    -std::numeric_limits<double>::infinity();

// One canonical-form Gaussian component:  exp(g + h.x - x.K.x / 2).
// A zero-mass component (a tuple deleted by a constraint) is the sentinel
// g = -inf with zeroed h and K.
struct CanonicalGaussian {
  double g = 0.0;
  Eigen::VectorXd h;
  Eigen::MatrixXd K;
};

struct GaussianMoments {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditional Gaussian potential: a dense table of canonical Gaussian
// components over a fixed continuous scope, one component per configuration
// of the discrete scope. Scopes are kept sorted by variable id; the table is
// row-major with the first scope variable slowest.
class CGPotential {
 public:
  // The vacuous potential: empty scopes, single component with g = 0.
  CGPotential();

  CGPotential(std::vector<int> discrete_vars, std::vector<int> cards,
              std::vector<int> continuous_vars);

  const std::vector<int>& discrete_vars() const { return dvars_; }
  const std::vector<int>& cards() const { return dcards_; }
  const std::vector<int>& continuous_vars() const { return cvars_; }
  bool discrete_only() const { return cvars_.empty(); }
  int config_count() const { return static_cast<int>(g_.size()); }
  int continuous_dim() const { return static_cast<int>(cvars_.size()); }

  double g(int idx) const { return g_[idx]; }
  double& g(int idx) { return g_[idx]; }
  const Eigen::VectorXd& h(int idx) const { return h_[idx]; }
  Eigen::VectorXd& h(int idx) { return h_[idx]; }
  const Eigen::MatrixXd& K(int idx) const { return K_[idx]; }
  Eigen::MatrixXd& K(int idx) { return K_[idx]; }

  bool zero_mass(int idx) const { return g_[idx] == kNegativeInfinity; }
  void set_zero_mass(int idx);

  // Table indexing. `cfg` is aligned with discrete_vars().
  int index_of(std::span<const int> cfg) const;
  void decode(int idx, std::span<int> cfg) const;

  // Log value of a discrete-only potential at a global assignment indexed by
  // variable id (entries for variables outside the scope are ignored).
  double log_at(std::span<const int> global) const;

  // Density at a full assignment (continuous values aligned with
  // continuous_vars()); used by tests.
  double log_density(std::span<const int> cfg,
                     const Eigen::VectorXd& x) const;

 private:
  std::vector<int> dvars_;
  std::vector<int> dcards_;
  std::vector<int> cvars_;
  std::vector<double> g_;
  std::vector<Eigen::VectorXd> h_;  // empty unless cvars_ nonempty
  std::vector<Eigen::MatrixXd> K_;
};

// --- construction from model functions -------------------------------------

CGPotential from_tabular(const TabularCPD& cpd, const HybridMixedNetwork& net);
CGPotential from_linear_gaussian(const LinearGaussianCPD& cpd,
                                 const HybridMixedNetwork& net);
CGPotential from_constraint(const ConstraintRelation& rel,
                            const HybridMixedNetwork& net);
CGPotential function_potential(const HybridMixedNetwork& net, FunctionId f);

// Re-encode a list of moment-form components over the given scopes.
CGPotential potential_from_moments(std::vector<int> discrete_vars,
                                   std::vector<int> cards,
                                   std::vector<int> continuous_vars,
                                   const std::vector<GaussianMoments>& moments);

// --- the message-passing operators ------------------------------------------

// Componentwise product over the union of both scopes. Zero mass absorbs.
CGPotential multiply(const CGPotential& a, const CGPotential& b);

// Componentwise quotient: subtracts (g, h, K) of `b` (whose scopes must be
// contained in `a`'s). A zero-mass divisor config yields a zero-mass result
// config; the dividend is zero there whenever `b` was a factor of `a`, which
// is how calibration uses it.
CGPotential divide(const CGPotential& a, const CGPotential& b);

// Exact integration (strong marginal) of `vars` via Schur complement.
// Throws SingularBlock when the sub-block of K over `vars` is not positive
// definite in some live component (an improper marginal).
CGPotential marginalize_continuous(const CGPotential& p,
                                   const std::vector<int>& vars);

// Sum out discrete `vars`. Exact log-sum-exp when the continuous scope is
// empty; otherwise each surviving configuration's mixture is collapsed to
// the single Gaussian with matching weight, mean and covariance (the weak
// marginal).
CGPotential marginalize_discrete(const CGPotential& p,
                                 const std::vector<int>& vars);

// Instantiate observed variables: discrete evidence slices the table,
// continuous evidence substitutes into (g, h, K). Variables outside the
// scopes are ignored.
CGPotential reduce_evidence(const CGPotential& p, const Evidence& ev);

// Moment form of every component (zero-mass components get weight 0).
std::vector<GaussianMoments> to_moments(const CGPotential& p);

// log of the total mass (all continuous integrated, all discrete summed);
// -inf when every component is zero-mass.
double total_log_mass(const CGPotential& p);

// Marginalize onto `keep` (continuous integrated first, then discrete
// summed), the projection used for separator messages.
CGPotential project_onto(const CGPotential& p, std::span<const int> keep);

// Shift g so the maximum over live components is zero; returns the shift
// that was removed (0 if every component is zero-mass).
double normalize_max_g(CGPotential& p);

}  // namespace hmn
