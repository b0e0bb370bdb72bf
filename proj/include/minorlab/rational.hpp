#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace minorlab {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "3", "-3/4", "0.125", "1e-3", "2.5E2". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// Canonical "p/q" or "p" form.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

// Exact binary value of a finite double.
Rational from_double(double x);

// sqrt(q) when q is the square of a rational.
std::optional<Rational> exact_sqrt(const Rational& q);

Rational rational_abs(const Rational& q);

// num/den in canonical form (mpq_class(num, den) alone does not reduce).
Rational ratio(long num, long den);

// Smallest integer >= q.
Integer ceil_rational(const Rational& q);

}  // namespace minorlab
