#pragma once

#include <cstddef>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

namespace crossmatch {

using Rational = boost::multiprecision::cpp_rational;

/// Closed-form null pmf of the cross-pair count in exact rational arithmetic,
/// keyed on a1. Intended for validation at small t (even t).
std::map<std::size_t, Rational> null_pmf_rational(std::size_t m, std::size_t n);

}  // namespace crossmatch
