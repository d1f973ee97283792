#ifndef STFRAG_STABLE_PARAMS_HPP
#define STFRAG_STABLE_PARAMS_HPP

#include "stfrag/errors.hpp"

namespace stfrag {

// Index alpha in (1,2) together with the three constants that appear in
// every closed form downstream:
//
//   c_big   = alpha*(alpha-1)/Gamma(2-alpha)        (jump intensity scale)
//   c_small = 1/(alpha*Gamma(1-1/alpha))            (ladder-time density at 0)
//   d_const = alpha^2*Gamma(2-1/alpha)/Gamma(2-alpha)  (dislocation scale)
//
// They satisfy d_const = c_big/(alpha*c_small) exactly.
struct StableParams {
    double alpha;
    double c_big;
    double c_small;
    double d_const;

    double beta() const { return 1.0 / alpha; } // subordinator index
};

// Numerics degrade near the endpoints of (1,2); by default alpha is
// restricted to [1.05, 1.95] and the caller must opt in to go outside.
StableParams derive_constants(double alpha, bool allow_extreme = false);

} // namespace stfrag

#endif
