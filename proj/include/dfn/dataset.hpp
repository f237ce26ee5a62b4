#pragma once

#include <string>
#include <vector>

#include "dfn/image.hpp"

namespace dfn {

struct DatasetSubject {
    std::string id;
    Image target_image;
    LabelMap target_label;
    AtlasSet atlases;
};

struct Dataset {
    double row_spacing_mm = 1.0;
    double col_spacing_mm = 1.0;
    std::vector<DatasetSubject> subjects;

    const DatasetSubject& subject(const std::string& id) const;
};

/// Load a dataset manifest (JSON) and every raster it references. Validates
/// dimensions, spacing and the label probability invariant up front; errors
/// name the offending file.
Dataset load_manifest(const std::string& manifest_path);

}  // namespace dfn
