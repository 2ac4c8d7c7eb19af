#pragma once

#include <string>

namespace postprice {

// Locale-independent, 12 significant digits; "inf" for infinity.
std::string format_number(double x);

}  // namespace postprice
