#include "cranio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cranio/distance.hpp"
#include "cranio/morphology.hpp"

namespace cranio {

BinaryGrid surface_voxels(const BinaryGrid& mask) {
    return logical(mask, erode(mask, 1), MaskOp::Xor);
}

double dsc(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_geometry(a, b, "dsc operands differ in geometry");
    std::size_t na = 0, nb = 0, ni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a.data[i];
        nb += b.data[i];
        ni += a.data[i] & b.data[i];
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

double bdsc(const BinaryGrid& a, const BinaryGrid& b, double tau_mm) {
    require_same_geometry(a, b, "bdsc operands differ in geometry");
    auto band = [tau_mm](const BinaryGrid& m) {
        BinaryGrid out(m.dims, m.spacing, m.origin);
        BinaryGrid boundary = surface_voxels(m);
        if (count_nonzero(boundary) == 0) return out; // empty mask -> empty band
        ScalarGrid dist = distance_transform(boundary);
        for (std::size_t i = 0; i < m.size(); ++i) out.data[i] = dist.data[i] <= tau_mm ? 1 : 0;
        return out;
    };
    BinaryGrid band_union = logical(band(a), band(b), MaskOp::Or);
    return dsc(logical(a, band_union, MaskOp::And), logical(b, band_union, MaskOp::And));
}

namespace {

// nearest-rank percentile of an unsorted sample
double percentile_nearest_rank(std::vector<double>& v, double p) {
    std::sort(v.begin(), v.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(v.size())));
    if (rank < 1) rank = 1;
    if (rank > v.size()) rank = v.size();
    return v[rank - 1];
}

} // namespace

double hd95(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_geometry(a, b, "hd95 operands differ in geometry");
    if (count_nonzero(a) == 0 || count_nonzero(b) == 0)
        return std::numeric_limits<double>::infinity();

    BinaryGrid sa = surface_voxels(a);
    BinaryGrid sb = surface_voxels(b);
    ScalarGrid da = distance_transform(sa);
    ScalarGrid db = distance_transform(sb);

    std::vector<double> a_to_b, b_to_a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sa.data[i]) a_to_b.push_back(db.data[i]);
        if (sb.data[i]) b_to_a.push_back(da.data[i]);
    }
    double p1 = percentile_nearest_rank(a_to_b, 0.95);
    double p2 = percentile_nearest_rank(b_to_a, 0.95);
    return std::max(p1, p2);
}

MetricsReport evaluate_case(const std::string& case_id, const BinaryGrid& prediction,
                            const BinaryGrid& truth, double tau_mm) {
    MetricsReport r;
    r.case_id = case_id;
    r.dsc = dsc(prediction, truth);
    r.bdsc = bdsc(prediction, truth, tau_mm);
    r.hd95 = hd95(prediction, truth);
    return r;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MissingFile("cannot open " + path + " for writing");
    out << "case_id,dsc,bdsc,hd95\n";
    double sd = 0, sb = 0, sh = 0;
    for (const auto& r : reports) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", r.case_id.c_str(), r.dsc, r.bdsc,
                      r.hd95);
        out << buf;
        sd += r.dsc;
        sb += r.bdsc;
        sh += r.hd95;
    }
    if (!reports.empty()) {
        double n = static_cast<double>(reports.size());
        double md = sd / n, mb = sb / n, mh = sh / n;
        double vd = 0, vb = 0, vh = 0;
        for (const auto& r : reports) {
            vd += (r.dsc - md) * (r.dsc - md);
            vb += (r.bdsc - mb) * (r.bdsc - mb);
            vh += (r.hd95 - mh) * (r.hd95 - mh);
        }
        char buf[256];
        std::snprintf(buf, sizeof(buf), "mean,%.6f,%.6f,%.6f\n", md, mb, mh);
        out << buf;
        std::snprintf(buf, sizeof(buf), "std,%.6f,%.6f,%.6f\n", std::sqrt(vd / n),
                      std::sqrt(vb / n), std::sqrt(vh / n));
        out << buf;
    }
}

} // namespace cranio
