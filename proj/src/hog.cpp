#include "fer/hog.hpp"

#include <cmath>

#include "fer/errors.hpp"
#include "fer/parallel.hpp"

namespace fer {

namespace {

constexpr double kRadToDeg = 57.295779513082320876798154814105;

std::size_t blocks_along(std::size_t cells, const HogConfig& cfg) {
    return (cells - static_cast<std::size_t>(cfg.block_cells)) /
               static_cast<std::size_t>(cfg.block_stride) +
           1;
}

}  // namespace

void HogConfig::validate() const {
    if (cell_size < 2) throw ValidationError("hog: cell_size must be at least 2");
    if (bins < 2) throw ValidationError("hog: bins must be at least 2");
    if (block_cells < 1) throw ValidationError("hog: block_cells must be at least 1");
    if (block_stride < 1) throw ValidationError("hog: block_stride must be at least 1");
    if (!(norm_epsilon > 0)) throw ValidationError("hog: norm_epsilon must be positive");
}

std::size_t HogConfig::descriptor_length(std::size_t width, std::size_t height) const {
    validate();
    const auto cs = static_cast<std::size_t>(cell_size);
    if (width % cs != 0 || height % cs != 0)
        throw ValidationError("hog: image " + std::to_string(width) + "x" +
                              std::to_string(height) + " is not divisible by cell size " +
                              std::to_string(cell_size) + "; resize the image first");
    const std::size_t cells_x = width / cs;
    const std::size_t cells_y = height / cs;
    if (cells_x < static_cast<std::size_t>(block_cells) ||
        cells_y < static_cast<std::size_t>(block_cells))
        throw ValidationError("hog: image too small for a single block");
    return blocks_along(cells_x, *this) * blocks_along(cells_y, *this) *
           static_cast<std::size_t>(block_cells) * static_cast<std::size_t>(block_cells) *
           static_cast<std::size_t>(bins);
}

GradientField gradients(const GrayImage& img, bool signed_gradients) {
    if (img.width < 3 || img.height < 3)
        throw ValidationError("gradients: image must be at least 3x3, got " +
                              std::to_string(img.width) + "x" + std::to_string(img.height));

    const std::size_t w = img.width, h = img.height;
    GradientField f{Matrix(h, w), Matrix(h, w)};
    const double span = signed_gradients ? 360.0 : 180.0;

    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double left = img.at(x == 0 ? 0 : x - 1, y);
            const double right = img.at(x == w - 1 ? w - 1 : x + 1, y);
            const double up = img.at(x, y == 0 ? 0 : y - 1);
            const double down = img.at(x, y == h - 1 ? h - 1 : y + 1);
            const double gx = right - left;
            const double gy = down - up;

            f.magnitude(y, x) = std::sqrt(gx * gx + gy * gy);
            double deg = std::atan2(gy, gx) * kRadToDeg;  // (-180, 180]
            if (deg < 0.0) deg += span;
            if (deg >= span) deg -= span;
            f.orientation(y, x) = deg;
        }
    }
    return f;
}

HogDescriptor compute_hog(const GrayImage& img, const HogConfig& cfg) {
    const std::size_t expected = cfg.descriptor_length(img.width, img.height);

    const auto cs = static_cast<std::size_t>(cfg.cell_size);
    const std::size_t cells_x = img.width / cs;
    const std::size_t cells_y = img.height / cs;
    const int bins = cfg.bins;
    const double span = cfg.signed_gradients ? 360.0 : 180.0;
    const double bin_width = span / bins;

    const GradientField grad = gradients(img, cfg.signed_gradients);

    // Per-cell histograms; magnitude split linearly between the two
    // nearest bin centers (centers at (i + 0.5) * bin_width, circular).
    std::vector<double> hist(cells_x * cells_y * bins, 0.0);
    for (std::size_t y = 0; y < img.height; ++y) {
        const std::size_t cy = y / cs;
        for (std::size_t x = 0; x < img.width; ++x) {
            const std::size_t cx = x / cs;
            const double mag = grad.magnitude(y, x);
            const double t = grad.orientation(y, x) / bin_width - 0.5;
            double lower = std::floor(t);
            const double frac = t - lower;
            int b0 = static_cast<int>(lower);
            b0 = ((b0 % bins) + bins) % bins;
            const int b1 = (b0 + 1) % bins;
            double* cell = hist.data() + (cy * cells_x + cx) * bins;
            cell[b0] += (1.0 - frac) * mag;
            cell[b1] += frac * mag;
        }
    }

    const std::size_t bx = blocks_along(cells_x, cfg);
    const std::size_t by = blocks_along(cells_y, cfg);
    const auto bc = static_cast<std::size_t>(cfg.block_cells);
    const auto stride = static_cast<std::size_t>(cfg.block_stride);

    HogDescriptor out;
    out.values.reserve(expected);
    std::vector<double> block(bc * bc * bins);
    for (std::size_t byi = 0; byi < by; ++byi) {
        for (std::size_t bxi = 0; bxi < bx; ++bxi) {
            std::size_t k = 0;
            double norm_sq = 0.0;
            for (std::size_t cy = 0; cy < bc; ++cy) {
                const std::size_t cell_row = byi * stride + cy;
                for (std::size_t cx = 0; cx < bc; ++cx) {
                    const std::size_t cell_col = bxi * stride + cx;
                    const double* cell = hist.data() + (cell_row * cells_x + cell_col) * bins;
                    for (int b = 0; b < bins; ++b) {
                        block[k++] = cell[b];
                        norm_sq += cell[b] * cell[b];
                    }
                }
            }
            const double inv = 1.0 / std::sqrt(norm_sq + cfg.norm_epsilon * cfg.norm_epsilon);
            for (double v : block) out.values.push_back(v * inv);
        }
    }
    return out;
}

FeatureMatrix hog_matrix(const std::vector<GrayImage>& images, const HogConfig& cfg) {
    if (images.empty()) throw ValidationError("hog_matrix: empty image list");
    const std::size_t w = images.front().width;
    const std::size_t h = images.front().height;
    for (std::size_t i = 1; i < images.size(); ++i)
        if (images[i].width != w || images[i].height != h)
            throw ValidationError("hog_matrix: image " + std::to_string(i) + " is " +
                                  std::to_string(images[i].width) + "x" +
                                  std::to_string(images[i].height) + ", expected " +
                                  std::to_string(w) + "x" + std::to_string(h));

    const std::size_t len = cfg.descriptor_length(w, h);
    FeatureMatrix fm;
    fm.x = Matrix(images.size(), len);
    parallel_for(images.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const HogDescriptor d = compute_hog(images[i], cfg);
            std::copy(d.values.begin(), d.values.end(), fm.x.row(i));
        }
    });
    return fm;
}

}  // namespace fer
