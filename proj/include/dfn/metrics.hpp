#pragma once

#include <string>
#include <vector>

#include "dfn/image.hpp"

namespace dfn {

/// Boolean raster with physical spacing, the unit all overlap and surface
/// measures operate on.
struct BinaryMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> values;
    double row_spacing_mm = 1.0;
    double col_spacing_mm = 1.0;

    BinaryMask() = default;
    BinaryMask(int m, int n, double row_mm = 1.0, double col_mm = 1.0)
        : rows(m), cols(n), values(static_cast<std::size_t>(m) * n, 0),
          row_spacing_mm(row_mm), col_spacing_mm(col_mm) {
        if (row_mm <= 0.0 || col_mm <= 0.0)
            throw std::invalid_argument("BinaryMask: spacing must be positive");
    }

    bool at(int m, int n) const { return values[static_cast<std::size_t>(m) * cols + n] != 0; }
    void set(int m, int n, bool v) {
        values[static_cast<std::size_t>(m) * cols + n] = v ? 1 : 0;
    }
    std::size_t count() const;
};

/// Foreground mask of a label map: probability of class `cls` >= 0.5.
BinaryMask mask_from_label(const LabelMap& label, int cls, double row_mm, double col_mm);

/// 2 |A ∩ B| / (|A| + |B|); both empty counts as 1, exactly one empty as 0.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Symmetric Hausdorff distance between the two pixel coordinate sets, in mm.
/// Undefined (throws) when either mask is empty.
double hausdorff_mm(const BinaryMask& a, const BinaryMask& b);

/// 8-connected boundary of a mask: a foreground pixel is boundary if any of
/// its 8 neighbours is background or lies outside the raster.
struct Contour {
    std::vector<std::pair<double, double>> points_mm;  // (row*row_mm, col*col_mm)
};

Contour extract_contour(const BinaryMask& mask);

/// Symmetric mean of nearest-point distances between two contours, in mm.
double apd_mm(const Contour& a, const Contour& b);

/// Percentage of contours with APD below 5 mm.
double good_percentage(const std::vector<double>& apds);

/// One evaluated slice pair.
struct SlicePair {
    std::string subject;
    BinaryMask prediction;
    BinaryMask truth;
};

struct SubjectReport {
    std::string subject;
    double dice = 0.0;     // pooled over the subject's slices
    double hd_mm = 0.0;    // over the stacked voxel set (NaN if undefined)
    double apd_mm = 0.0;   // mean over slices (NaN if undefined)
    double good_pct = 0.0; // over the subject's slices
    int slices = 0;
};

struct RunReport {
    std::vector<SubjectReport> subjects;
    double mean_dice = 0.0, std_dice = 0.0;
    double mean_hd = 0.0, std_hd = 0.0;
    double mean_apd = 0.0, std_apd = 0.0;
    double mean_good = 0.0, std_good = 0.0;
};

/// Aggregate per subject, then mean/std across subjects. A subject's slices
/// are treated as one voxel set for Dice and Hausdorff (slice index scaled by
/// slice_spacing_mm); APD and the good percentage are per-slice measures.
RunReport evaluate_run(const std::vector<SlicePair>& pairs, double slice_spacing_mm = 1.0);

std::string run_report_csv(const RunReport& report);

}  // namespace dfn
