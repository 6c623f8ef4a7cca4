#pragma once

#include <vector>

#include "fer/image.hpp"
#include "fer/matrix.hpp"

namespace fer {

/// Dalal-Triggs style geometry. The defaults (8px cells, 2x2-cell blocks,
/// 1-cell stride, 9 unsigned bins, L2 block norm) give 15*15*36 = 8100
/// features on a 128x128 input.
struct HogConfig {
    int cell_size = 8;
    int block_cells = 2;
    int block_stride = 1;
    int bins = 9;
    bool signed_gradients = false;
    double norm_epsilon = 1e-6;

    void validate() const;
    /// Descriptor length for a given image size (blocks_x * blocks_y *
    /// block_cells^2 * bins). Throws if the size is incompatible.
    std::size_t descriptor_length(std::size_t width, std::size_t height) const;
};

/// Block-major descriptor: blocks row-major over the image, cells
/// row-major within a block, bins ascending within a cell. Every block
/// sub-vector is L2-normalized as v / sqrt(|v|^2 + eps^2).
struct HogDescriptor {
    std::vector<double> values;
};

struct GradientField {
    Matrix magnitude;    // height x width
    Matrix orientation;  // degrees, [0,180) unsigned or [0,360) signed
};

/// Central differences [-1,0,1] in both axes, one-sided at the borders.
GradientField gradients(const GrayImage& img, bool signed_gradients = false);

HogDescriptor compute_hog(const GrayImage& img, const HogConfig& cfg);

/// Row i holds compute_hog(images[i]). All images must share dimensions.
FeatureMatrix hog_matrix(const std::vector<GrayImage>& images, const HogConfig& cfg);

}  // namespace fer
