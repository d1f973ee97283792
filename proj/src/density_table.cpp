#include "stfrag/density_table.hpp"

#include "stfrag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stfrag {

void DensityTable::finalize_from_pdf() {
    if (grid.size() != pdf.size() || grid.size() < 2)
        throw contract_error("DensityTable: grid/pdf size mismatch");
    cdf.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
    tail_mass = std::max(0.0, 1.0 - cdf.back());
}

void DensityTable::validate() const {
    if (grid.size() < 2 || grid.size() != pdf.size() || grid.size() != cdf.size())
        throw contract_error("DensityTable: inconsistent sizes");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw contract_error("DensityTable: grid not increasing");
        if (cdf[i] < cdf[i - 1] - 1e-12) throw contract_error("DensityTable: cdf decreasing");
    }
    for (double v : pdf)
        if (!(v >= 0.0) || !std::isfinite(v)) throw contract_error("DensityTable: bad pdf value");
    if (std::abs(cdf.back() + tail_mass - 1.0) > 1e-6)
        throw contract_error("DensityTable: cdf.back + tail_mass != 1");
    // pdf consistent with cdf under the trapezoid rule
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double inc = 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
        if (std::abs((cdf[i] - cdf[i - 1]) - inc) > 1e-4)
            throw contract_error("DensityTable: pdf/cdf trapezoid mismatch");
    }
}

double DensityTable::pdf_at(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back()) return 0.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i == 0) return pdf.front();
    if (i >= grid.size()) return pdf.back();
    const double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return pdf[i - 1] + w * (pdf[i] - pdf[i - 1]);
}

double DensityTable::sample(double u) const {
    if (cdf.empty() || !(total_mass() > 0.0))
        throw contract_error("DensityTable: sampling from empty table");
    const double target = std::clamp(u, 0.0, 1.0) * total_mass();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    if (i == 0) return grid.front();
    if (i >= grid.size()) return grid.back();
    // invert the trapezoid segment: cdf is quadratic in x on the cell
    const double c0 = cdf[i - 1], h = grid[i] - grid[i - 1];
    const double f0 = pdf[i - 1], f1 = pdf[i];
    const double d = target - c0;
    const double a = 0.5 * (f1 - f0) / h;
    double x;
    if (std::abs(a) < 1e-14 * std::max(f0, 1e-300)) {
        x = (f0 > 0.0) ? d / f0 : 0.5 * h;
    } else {
        const double disc = f0 * f0 + 4.0 * a * d;
        x = (disc > 0.0) ? (std::sqrt(disc) - f0) / (2.0 * a) : 0.5 * h;
    }
    return grid[i - 1] + std::clamp(x, 0.0, h);
}

nlohmann::json DensityTable::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["t"] = t;
    j["grid"] = grid;
    j["pdf"] = pdf;
    j["cdf"] = cdf;
    j["tail_mass"] = tail_mass;
    j["build_params"] = build_params;
    return j;
}

DensityTable DensityTable::from_json(const nlohmann::json& j) {
    DensityTable t;
    t.alpha = j.at("alpha").get<double>();
    t.t = j.at("t").get<double>();
    t.grid = j.at("grid").get<std::vector<double>>();
    t.pdf = j.at("pdf").get<std::vector<double>>();
    t.cdf = j.at("cdf").get<std::vector<double>>();
    t.tail_mass = j.at("tail_mass").get<double>();
    t.build_params = j.value("build_params", nlohmann::json::object());
    t.validate();
    return t;
}

} // namespace stfrag
