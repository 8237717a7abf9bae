#pragma once

#include <string>

namespace growthlab {

/// Shortest decimal form that reads back to the same double.
std::string shortest_repr(double v);

/// Fixed 17-significant-digit form used for CSV output.
std::string full_precision(double v);

}  // namespace growthlab
