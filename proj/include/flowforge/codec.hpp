#pragma once

#include <span>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/image.hpp"

namespace flowforge {

// Magnitude normalization plus the HSV flow encoding: magnitudes are
// square-root compressed against a dataset-level scale factor, then the
// angle drives hue and the compressed magnitude drives value, saturation
// pinned to 1.

struct CodecConfig {
    double scale_factor_px = 0.0;  // dataset-level, pixels
    double percentile = 99.0;
};

struct EncodedFlow {
    Image<Rgb> grid;  // RGB in [0,1]

    int width() const { return grid.width(); }
    int height() const { return grid.height(); }
};

// Nearest-rank percentile of per-pixel magnitudes over all valid pixels of
// all fields. Throws std::domain_error when the chosen percentile magnitude
// is zero (nothing to normalize against).
double compute_scale_factor(std::span<const FlowField> flows, double percentile = 99.0);

// Direction is preserved exactly; magnitude becomes min(1, sqrt(|f|/s_f)).
// Zero vectors stay zero. The mask is carried through.
FlowField normalize_flow(const FlowField& f, double scale_factor_px);

// Hue from the flow angle (+x maps to red at 0 degrees, counter-clockwise),
// value from the normalized magnitude, saturation 1. Inputs must satisfy
// |f| <= 1 + 1e-9. Masked-out pixels encode as black.
EncodedFlow flow_to_rgb(const FlowField& f_normalized);

// Inverse mapping. Magnitude decodes as m^2 * s_f; pixels clipped during
// normalization (m = 1) decode to s_f, the best available bound. The
// returned mask is all-true: the encoding itself carries no validity bit
// (that lives in the sidecar mask on disk).
FlowField rgb_to_flow(const EncodedFlow& e, double scale_factor_px);

// standard sexagesimal-sector conversions
Rgb hsv_to_rgb(double hue_deg, double sat, double val);
void rgb_to_hsv(const Rgb& c, double& hue_deg, double& sat, double& val);

}  // namespace flowforge
