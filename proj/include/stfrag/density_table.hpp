#ifndef STFRAG_DENSITY_TABLE_HPP
#define STFRAG_DENSITY_TABLE_HPP

#include <json.hpp>

#include <string>
#include <vector>

namespace stfrag {

// Tabulated density with an explicit unresolved-tail bucket.  The cdf is the
// trapezoid accumulation of the pdf over the grid, so cdf.back() + tail_mass
// is 1 by bookkeeping; accuracy lives in the grid resolution and is checked
// by the builders.
struct DensityTable {
    double alpha = 0.0;
    double t = 0.0; // secondary identifying parameter, 0 when unused
    std::vector<double> grid;
    std::vector<double> pdf;
    std::vector<double> cdf;
    double tail_mass = 0.0;
    nlohmann::json build_params = nlohmann::json::object();

    // trapezoid cdf from pdf; tail_mass = max(0, 1 - total)
    void finalize_from_pdf();
    // throws contract_error when the type invariants fail
    void validate() const;

    double total_mass() const { return cdf.empty() ? 0.0 : cdf.back(); }
    // linear-interpolated pdf, 0 outside the grid
    double pdf_at(double x) const;
    // inverse of the grid cdf at level u*total_mass(), u in [0,1]
    double sample(double u) const;

    nlohmann::json to_json() const;
    static DensityTable from_json(const nlohmann::json& j);
};

} // namespace stfrag

#endif
