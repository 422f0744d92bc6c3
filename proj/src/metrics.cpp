#include "hmn/metrics.hpp"

#include <cmath>

namespace hmn {

ErrorMetrics compute_errors(const std::map<int, std::vector<double>>& exact,
                            const std::map<int, std::vector<double>>& approx) {
  if (exact.empty())
    fail(ErrorCode::UndefinedMetric, "no variables to compare");
  ErrorMetrics m;
  long long n_values = 0, n_rel = 0, n_kl = 0, n_vars = 0;
  double kl_sum_acc = 0.0;

  for (const auto& [var, pe] : exact) {
    auto it = approx.find(var);
    if (it == approx.end() || it->second.size() != pe.size())
      fail(ErrorCode::InvalidArgument,
           "approximate marginals do not match the exact ones");
    const auto& pa = it->second;
    double var_kl = 0.0;
    for (std::size_t k = 0; k < pe.size(); ++k) {
      const double diff = std::abs(pa[k] - pe[k]);
      m.absolute += diff;
      ++n_values;
      if (pe[k] > 0.0) {
        m.relative += diff / pe[k];
        ++n_rel;
        double q = pa[k];
        if (q < 1e-12) {
          q = 1e-12;
          ++m.kl_clamped;
        }
        const double term = pe[k] * std::log(pe[k] / q);
        m.kl += term;
        var_kl += term;
        ++n_kl;
      } else {
        ++m.relative_skipped;
      }
    }
    kl_sum_acc += var_kl;
    ++n_vars;
  }
  m.absolute /= static_cast<double>(n_values);
  if (n_rel > 0) m.relative /= static_cast<double>(n_rel);
  if (n_kl > 0) m.kl /= static_cast<double>(n_kl);
  m.kl_summed = kl_sum_acc / static_cast<double>(n_vars);
  return m;
}

double absolute_error(const std::map<int, std::vector<double>>& exact,
                      const std::map<int, std::vector<double>>& approx) {
  return compute_errors(exact, approx).absolute;
}

double relative_error(const std::map<int, std::vector<double>>& exact,
                      const std::map<int, std::vector<double>>& approx) {
  return compute_errors(exact, approx).relative;
}

double kl_distance(const std::map<int, std::vector<double>>& exact,
                   const std::map<int, std::vector<double>>& approx) {
  return compute_errors(exact, approx).kl;
}

}  // namespace hmn
