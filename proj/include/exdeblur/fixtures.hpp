#pragma once

#include <cstdint>
#include <vector>

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"
#include "exdeblur/structure.hpp"

namespace exdeblur::fixtures {

/// Geometry of a synthetic face: a bright ellipse with a dark mouth bar and
/// two dark eye blobs on a textured background. All lengths are fractions
/// of the canvas size.
struct FaceParams {
    double cx = 0.5, cy = 0.5;
    double rx = 0.30, ry = 0.38;
    double eye_dx = 0.11, eye_y = -0.08, eye_r = 0.045;
    double mouth_y = 0.17, mouth_w = 0.14, mouth_h = 0.03;
    double face_level = 0.78;
    double background = 0.35;
    double feature_level = 0.15;
    double texture = 0.02;
    std::uint64_t texture_seed = 1;
};

/// Deterministic identity geometry; `variation` perturbs expression-like
/// details (mouth, eyes, texture) of that identity.
FaceParams face_identity(int identity, int variation = 0);

GrayImage render_face(const FaceParams& p, int width, int height);

/// Mask over the lower face contour, both eyes and the mouth: pixels within
/// `band` pixels of those component boundaries.
ContourMask face_mask(const FaceParams& p, int width, int height, double band = 2.0);

/// Four fixed trajectory kernels of at most 15x15.
std::vector<BlurKernel> suite_kernels();
/// Eight fixed trajectory kernels for the matching protocol.
std::vector<BlurKernel> matching_kernels();

}  // namespace exdeblur::fixtures
