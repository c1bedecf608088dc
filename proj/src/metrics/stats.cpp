#include "blp/metrics/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "blp/errors.hpp"

namespace blp {

double mean(std::span<const double> v) {
  if (v.empty()) throw PreconditionError("mean of an empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("paired_t: series lengths differ");
  if (a.size() < 2) throw PreconditionError("paired_t needs n >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = sample_std(d);
  if (!(sd > 0.0)) throw NumericError("paired_t: differences have zero variance");
  return mean(d) / (sd / std::sqrt(static_cast<double>(d.size())));
}

double student_t_quantile(double p, double df) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

ConfidenceInterval mean_ci(std::span<const double> series, double level) {
  if (series.size() < 2) throw PreconditionError("mean_ci needs n >= 2");
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("confidence level must be in (0,1)");
  const double n = static_cast<double>(series.size());
  const double m = mean(series);
  const double half = student_t_quantile(0.5 + level / 2.0, n - 1.0) * sample_std(series) / std::sqrt(n);
  return {m, m - half, m + half};
}

}  // namespace blp
