#pragma once

#include <map>
#include <vector>

#include "hmn/model.hpp"

namespace hmn {

// The three accuracy measures of the evaluation protocol, averaged over all
// values of all compared variables. `kl` averages the pointwise term
// P_e * ln(P_e / P_a) exactly as stated; `kl_summed` is the conventional
// per-variable sum, averaged over variables, kept as a sanity column.
struct ErrorMetrics {
  double absolute = 0.0;
  double relative = 0.0;
  double kl = 0.0;
  double kl_summed = 0.0;
  // Entries with exact probability 0 are skipped for relative/KL and
  // counted; approximate zeros are clamped to 1e-12 for KL and counted.
  long long relative_skipped = 0;
  long long kl_clamped = 0;
};

// Both maps give a distribution per discrete variable id; they must cover
// the same variables with matching lengths.
ErrorMetrics compute_errors(const std::map<int, std::vector<double>>& exact,
                            const std::map<int, std::vector<double>>& approx);

double absolute_error(const std::map<int, std::vector<double>>& exact,
                      const std::map<int, std::vector<double>>& approx);
double relative_error(const std::map<int, std::vector<double>>& exact,
                      const std::map<int, std::vector<double>>& approx);
double kl_distance(const std::map<int, std::vector<double>>& exact,
                   const std::map<int, std::vector<double>>& approx);

}  // namespace hmn
