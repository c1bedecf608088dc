#pragma once

#include <span>

namespace blp {

double mean(std::span<const double> v);
// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double sample_std(std::span<const double> v);

// t = mean(d) / (sd(d) / sqrt(n)) for d = a - b. Throws PreconditionError on
// unequal lengths or n < 2 and NumericError when the differences have zero
// variance.
double paired_t(std::span<const double> a, std::span<const double> b);

struct ConfidenceInterval {
  double mean = 0.0, lower = 0.0, upper = 0.0;
  double half_width() const { return upper - mean; }
};

// Student-t interval mean +- t_{n-1,(1+level)/2} * sd / sqrt(n).
ConfidenceInterval mean_ci(std::span<const double> series, double level = 0.95);
double student_t_quantile(double p, double df);

}  // namespace blp
