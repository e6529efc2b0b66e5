#pragma once

#include "doctest.h"

// Relative comparison: |a - b| < eps * max(|a|, |b|); exact zeros match.
inline doctest::Approx rel(double v, double eps = 1e-9) { return doctest::Approx(v).epsilon(eps).scale(1e-300); }
