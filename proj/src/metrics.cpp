#include "dfn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dfn {

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto v : values) n += v != 0;
    return n;
}

BinaryMask mask_from_label(const LabelMap& label, int cls, double row_mm, double col_mm) {
    if (cls < 0 || cls >= label.class_count)
        throw std::invalid_argument("mask_from_label: class index out of range");
    BinaryMask mask(label.rows, label.cols, row_mm, col_mm);
    for (int m = 0; m < label.rows; ++m)
        for (int n = 0; n < label.cols; ++n)
            mask.set(m, n, label.at(m, n, cls) >= 0.5f);
    return mask;
}

namespace {

void check_same_grid(const BinaryMask& a, const BinaryMask& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument(std::string(what) + ": masks must have equal dims");
}

struct P3 {
    double r, c, z;
};

using PointSet3 = std::vector<P3>;

PointSet3 mask_points_mm(const BinaryMask& m, double z_mm = 0.0) {
    PointSet3 pts;
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            if (m.at(r, c)) pts.push_back({r * m.row_spacing_mm, c * m.col_spacing_mm, z_mm});
    return pts;
}

double directed_max_min(const PointSet3& from, const PointSet3& to) {
    double worst = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) {
            const double dr = p.r - q.r, dc = p.c - q.c, dz = p.z - q.z;
            best = std::min(best, dr * dr + dc * dc + dz * dz);
            if (best == 0.0) break;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

double hausdorff_points(const PointSet3& a, const PointSet3& b) {
    return std::max(directed_max_min(a, b), directed_max_min(b, a));
}

double mean_nearest(const std::vector<std::pair<double, double>>& from,
                    const std::vector<std::pair<double, double>>& to) {
    double acc = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) {
            const double dr = p.first - q.first;
            const double dc = p.second - q.second;
            best = std::min(best, dr * dr + dc * dc);
        }
        acc += std::sqrt(best);
    }
    return acc / static_cast<double>(from.size());
}

struct Stats {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stdev = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and population std over the finite entries.
Stats mean_std(const std::vector<double>& v) {
    std::vector<double> finite;
    for (double x : v)
        if (std::isfinite(x)) finite.push_back(x);
    Stats s;
    if (finite.empty()) return s;
    double sum = 0.0;
    for (double x : finite) sum += x;
    s.mean = sum / static_cast<double>(finite.size());
    double var = 0.0;
    for (double x : finite) var += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(var / static_cast<double>(finite.size()));
    return s;
}

}  // namespace

double dice(const BinaryMask& a, const BinaryMask& b) {
    check_same_grid(a, b, "dice");
    std::size_t inter = 0, ca = 0, cb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const bool va = a.values[i] != 0, vb = b.values[i] != 0;
        inter += va && vb;
        ca += va;
        cb += vb;
    }
    if (ca + cb == 0) return 1.0;  // both empty
    return 2.0 * static_cast<double>(inter) / static_cast<double>(ca + cb);
}

double hausdorff_mm(const BinaryMask& a, const BinaryMask& b) {
    check_same_grid(a, b, "hausdorff_mm");
    const PointSet3 pa = mask_points_mm(a);
    const PointSet3 pb = mask_points_mm(b);
    if (pa.empty() || pb.empty())
        throw std::invalid_argument("hausdorff_mm: undefined for an empty mask");
    return hausdorff_points(pa, pb);
}

Contour extract_contour(const BinaryMask& mask) {
    Contour contour;
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            if (!mask.at(r, c)) continue;
            bool boundary = false;
            for (int dr = -1; dr <= 1 && !boundary; ++dr) {
                for (int dc = -1; dc <= 1 && !boundary; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= mask.rows || nc < 0 || nc >= mask.cols ||
                        !mask.at(nr, nc))
                        boundary = true;
                }
            }
            if (boundary)
                contour.points_mm.emplace_back(r * mask.row_spacing_mm, c * mask.col_spacing_mm);
        }
    }
    return contour;
}

double apd_mm(const Contour& a, const Contour& b) {
    if (a.points_mm.empty() || b.points_mm.empty())
        throw std::invalid_argument("apd_mm: undefined for an empty contour");
    return 0.5 * (mean_nearest(a.points_mm, b.points_mm) +
                  mean_nearest(b.points_mm, a.points_mm));
}

double good_percentage(const std::vector<double>& apds) {
    if (apds.empty()) return 0.0;
    std::size_t good = 0;
    for (double a : apds) good += a < 5.0;
    return 100.0 * static_cast<double>(good) / static_cast<double>(apds.size());
}

RunReport evaluate_run(const std::vector<SlicePair>& pairs, double slice_spacing_mm) {
    if (pairs.empty()) throw std::invalid_argument("evaluate_run: no slice pairs");

    // Group slices by subject, keeping first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const SlicePair*>> groups;
    for (const auto& p : pairs) {
        check_same_grid(p.prediction, p.truth, "evaluate_run");
        if (groups.find(p.subject) == groups.end()) order.push_back(p.subject);
        groups[p.subject].push_back(&p);
    }

    RunReport report;
    std::vector<double> dices, hds, apds, goods;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& subject : order) {
        const auto& slices = groups[subject];
        SubjectReport sr;
        sr.subject = subject;
        sr.slices = static_cast<int>(slices.size());

        std::size_t inter = 0, cp = 0, ct = 0;
        PointSet3 pred3d, truth3d;
        std::vector<double> slice_apds;
        for (std::size_t z = 0; z < slices.size(); ++z) {
            const auto& sp = *slices[z];
            for (std::size_t i = 0; i < sp.prediction.values.size(); ++i) {
                const bool vp = sp.prediction.values[i] != 0, vt = sp.truth.values[i] != 0;
                inter += vp && vt;
                cp += vp;
                ct += vt;
            }
            const double z_mm = static_cast<double>(z) * slice_spacing_mm;
            PointSet3 ps = mask_points_mm(sp.prediction, z_mm);
            PointSet3 ts = mask_points_mm(sp.truth, z_mm);
            pred3d.insert(pred3d.end(), ps.begin(), ps.end());
            truth3d.insert(truth3d.end(), ts.begin(), ts.end());

            const Contour cpred = extract_contour(sp.prediction);
            const Contour ctruth = extract_contour(sp.truth);
            if (!cpred.points_mm.empty() && !ctruth.points_mm.empty())
                slice_apds.push_back(apd_mm(cpred, ctruth));
        }
        sr.dice = (cp + ct == 0)
                      ? 1.0
                      : 2.0 * static_cast<double>(inter) / static_cast<double>(cp + ct);
        sr.hd_mm = (pred3d.empty() || truth3d.empty()) ? nan
                                                       : hausdorff_points(pred3d, truth3d);
        if (slice_apds.empty()) {
            sr.apd_mm = nan;
            sr.good_pct = nan;
        } else {
            double sum = 0.0;
            for (double a : slice_apds) sum += a;
            sr.apd_mm = sum / static_cast<double>(slice_apds.size());
            sr.good_pct = good_percentage(slice_apds);
        }

        report.subjects.push_back(sr);
        dices.push_back(sr.dice);
        hds.push_back(sr.hd_mm);
        apds.push_back(sr.apd_mm);
        goods.push_back(sr.good_pct);
    }

    const Stats ds = mean_std(dices), hs = mean_std(hds), as = mean_std(apds),
                gs = mean_std(goods);
    report.mean_dice = ds.mean;
    report.std_dice = ds.stdev;
    report.mean_hd = hs.mean;
    report.std_hd = hs.stdev;
    report.mean_apd = as.mean;
    report.std_apd = as.stdev;
    report.mean_good = gs.mean;
    report.std_good = gs.stdev;
    return report;
}

std::string run_report_csv(const RunReport& report) {
    std::ostringstream os;
    os << "subject,slices,dice,hd_mm,apd_mm,good_pct\n";
    for (const auto& s : report.subjects)
        os << s.subject << ',' << s.slices << ',' << s.dice << ',' << s.hd_mm << ','
           << s.apd_mm << ',' << s.good_pct << '\n';
    os << "mean,," << report.mean_dice << ',' << report.mean_hd << ',' << report.mean_apd << ','
       << report.mean_good << '\n';
    os << "std,," << report.std_dice << ',' << report.std_hd << ',' << report.std_apd << ','
       << report.std_good << '\n';
    return os.str();
}

}  // namespace dfn
