#pragma once

#include <string>
#include <vector>

namespace stressfuse::svg {

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
  std::string color;
};

// Grouped vertical bars with a legend; values are clipped to [0, y_max].
std::string grouped_bars(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, double y_max);

// Horizontal bars around zero, positive values red and negative blue, one
// row per label.
std::string signed_hbars(const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& values);

std::string escape(const std::string& s);

}  // namespace stressfuse::svg
