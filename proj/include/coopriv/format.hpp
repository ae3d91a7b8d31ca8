#pragma once

#include <string>

namespace coopriv {

/// Shortest decimal text that reads back to the same double ("nan", "inf"
/// and "-inf" for non-finite values). Locale independent.
std::string format_number(double value);

}  // namespace coopriv
