#pragma once

#include <string>
#include <vector>

namespace sscox {

// Median of a copy of the values (mean of the two middle order statistics for
// even length). NaNs are not expected.
double median(std::vector<double> values);

// Linear-interpolation quantile (R type 7). p in [0, 1].
double quantile(std::vector<double> values, double p);

// Inverse standard normal CDF. |error| < 1e-13 over (0, 1).
double normal_quantile(double p);

// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace sscox
