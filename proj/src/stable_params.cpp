#include "stfrag/stable_params.hpp"

#include <cmath>

namespace stfrag {

StableParams derive_constants(double alpha, bool allow_extreme) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw domain_error("alpha must lie strictly inside (1,2)");
    if (!allow_extreme && (alpha < 1.05 || alpha > 1.95))
        throw domain_error("alpha outside admissible range [1.05, 1.95]; "
                           "pass allow_extreme to override");

    StableParams p;
    p.alpha = alpha;
    p.c_big = alpha * (alpha - 1.0) / std::tgamma(2.0 - alpha);
    p.c_small = 1.0 / (alpha * std::tgamma(1.0 - 1.0 / alpha));
    p.d_const = alpha * alpha * std::tgamma(2.0 - 1.0 / alpha) /
                std::tgamma(2.0 - alpha);
    return p;
}

} // namespace stfrag
