#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace acr {

using Rational = boost::multiprecision::cpp_rational;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;  // row-major

/// In-place reduced row echelon form; returns the pivot column of each
/// nonzero row.
std::vector<std::size_t> rref(RationalMatrix& m);

std::size_t rank(RationalMatrix m);

/// Basis of {x : m x = 0}, one vector per free column.
RationalMatrix null_space(const RationalMatrix& m, std::size_t cols);

/// Rescales to the primitive integer vector with a positive first nonzero
/// entry (zero vectors are returned unchanged).
RationalVector primitive(RationalVector v);

Rational dot(const RationalVector& a, const RationalVector& b);

/// Finds x >= 0 with a x = b by phase-one simplex (Bland's rule, exact).
bool feasible_nonnegative(const RationalMatrix& a, const RationalVector& b, RationalVector& x);

std::string to_string(const Rational& q);
double to_double(const Rational& q);

}  // namespace acr
