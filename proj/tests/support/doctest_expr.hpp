#pragma once

#include "doctest.h"
#include "odered/expr.hpp"

namespace doctest {
template <>
struct StringMaker<odered::Expr> {
  static String convert(const odered::Expr& e) { return e.str().c_str(); }
};
}  // namespace doctest
