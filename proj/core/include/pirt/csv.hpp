#pragma once

#include <string>

namespace pirt {

// Shortest decimal form that parses back to the same double ('.' decimal).
std::string format_number(double value);

}  // namespace pirt
