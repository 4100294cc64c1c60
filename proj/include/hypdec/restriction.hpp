#pragma once

#include "hypdec/field.hpp"
#include "hypdec/report.hpp"

namespace hypdec::restriction {

using field::FreqDensity;
using report::RatioReport;

// lhs = int over the periodized box (x3 in [-R, R]) of |Ef|^p,
// rhs = ||f||_p^p.
RatioReport restriction_ratio(const FreqDensity& f, double R, double p);

// lhs = int |Br_A of the K-cell fields of Ef|^p over the same box,
// rhs = ||f||_2^2 * (sup over R^{-1/2}-caps of the averaged cap norm)^{p-2}.
RatioReport broad_restriction_ratio(const FreqDensity& f, double R, int A,
                                    int K, double p);

}  // namespace hypdec::restriction
