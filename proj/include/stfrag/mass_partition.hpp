#ifndef STFRAG_MASS_PARTITION_HPP
#define STFRAG_MASS_PARTITION_HPP

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace stfrag {

// Ranked fragment masses plus an explicit unresolved-remainder bucket.
// parts are nonincreasing and sum(parts) + remainder == total to 1e-9.
struct MassPartition {
    std::vector<double> parts;
    double remainder = 0.0;
    double total = 0.0;

    // sort parts nonincreasing and check the bookkeeping identity
    void rank_and_check();

    double largest(std::size_t k = 0) const; // k-th ranked part, 0 if absent
    double sum_parts() const;

    nlohmann::json to_json(double t, std::uint64_t stream_id) const;
};

} // namespace stfrag

#endif
