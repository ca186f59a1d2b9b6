#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace packnn {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_abs(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

inline std::string to_string(const BigInt& v) { return v.str(); }

}  // namespace packnn
