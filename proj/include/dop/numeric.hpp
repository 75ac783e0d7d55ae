// -*- mode: c++ -*-

#ifndef DOP_NUMERIC_HPP
#define DOP_NUMERIC_HPP

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dop
{
  // subtree counts overflow 64 bits on realistic treebanks
  using Count    = boost::multiprecision::cpp_int;
  using Rational = boost::multiprecision::cpp_rational;

  inline double to_double(const Rational& value) { return value.convert_to<double>(); }

  inline double ratio(const Count& numerator, const Count& denominator)
  {
    return to_double(Rational(numerator, denominator));
  }

  inline std::string to_string(const Rational& value) { return value.str(); }
}

#endif
