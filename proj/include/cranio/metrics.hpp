#ifndef CRANIO_METRICS_HPP
#define CRANIO_METRICS_HPP

#include <string>
#include <vector>

#include "cranio/grid.hpp"

namespace cranio {

struct MetricsReport {
    std::string case_id;
    double dsc = 0.0;
    double bdsc = 0.0;
    double hd95 = 0.0; // mm; +inf when an operand is empty
};

// 2|a&b| / (|a|+|b|); 1.0 when both masks are empty.
double dsc(const BinaryGrid& a, const BinaryGrid& b);

// Dice restricted to the voxels within tau_mm of either mask's boundary
// (boundary = mask xor erode(mask, 1), distances via the exact EDT).
double bdsc(const BinaryGrid& a, const BinaryGrid& b, double tau_mm = 2.0);

// Symmetric 95th-percentile surface distance, nearest-rank percentile.
double hd95(const BinaryGrid& a, const BinaryGrid& b);

// mask xor erode(mask, 1)
BinaryGrid surface_voxels(const BinaryGrid& mask);

MetricsReport evaluate_case(const std::string& case_id, const BinaryGrid& prediction,
                            const BinaryGrid& truth, double tau_mm = 2.0);

// One row per case plus a mean/std summary row, fixed order.
void write_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports);

} // namespace cranio

#endif
