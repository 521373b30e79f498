#pragma once

#include <string>
#include <vector>

#include "actrec/metrics.hpp"

namespace actrec {

// One sweep grid point. Failed points keep ok = false and carry the error
// text; their metric fields are ignored.
struct SweepPoint {
    double axis_value = 0.0;
    bool ok = false;
    double accuracy = 0.0;
    double fm = 0.0;
    std::string note;
};

// All emitters return the complete file text and are deterministic: equal
// inputs give byte-equal output.

// Header "prediction,<class...>" then one row per predicted class.
std::string confusion_csv(const ConfusionMatrix& m, const std::vector<std::string>& classes);

// Header "<axis>,accuracy,fm,note"; doubles are written so that parsing
// them back recovers the exact value.
std::string summary_csv(const std::string& axis_name, const std::vector<SweepPoint>& points);

// Inverse of summary_csv. axis_name receives the first header column.
std::vector<SweepPoint> parse_summary_csv(const std::string& text, std::string* axis_name);

// C x C heatmap with counts, class names on both axes (rows = predictions,
// columns = labels).
std::string confusion_heatmap_svg(const ConfusionMatrix& m,
                                  const std::vector<std::string>& classes,
                                  const std::string& title);

// Accuracy and Fowlkes-Mallows versus the swept axis, one marker per
// successful point.
std::string line_chart_svg(const std::string& axis_name, const std::vector<SweepPoint>& points,
                           const std::string& title);

}  // namespace actrec
