#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epr/camera.hpp"
#include "epr/scene.hpp"

namespace epr {

/// Per-pixel boolean image, stored as 0/1 bytes.
struct Mask {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {}

    bool at(int x, int y) const { return bits[index(x, y)] != 0; }
    void set(int x, int y, bool on) { bits[index(x, y)] = on ? 1 : 0; }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t count() const;
    bool operator==(const Mask&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
};

/// P5 bytes with mask pixels at 255.
std::string encode_mask_pgm(const Mask& mask);

/// ITU-R 601 luma with integer weights: (77 R + 150 G + 29 B) >> 8.
std::vector<std::uint8_t> luma(const Image& img);

struct CannyParams {
    double sigma{1.4};
    double low{40.0};
    double high{100.0};
};

/// Sobel magnitude of the Gaussian-blurred luma, on the 0-255 intensity scale.
std::vector<double> canny_gradient_magnitude(const Image& img, double sigma);

/// Luma -> Gaussian blur (radius ceil(3 sigma), replicated border) -> Sobel ->
/// non-maximum suppression in four directions -> hysteresis with 8-connectivity.
/// The outermost pixel ring never carries edges.
/// Throws std::invalid_argument unless 0 < low <= high and sigma > 0.
Mask canny(const Image& img, const CannyParams& params = {});

struct Hsv {
    double h{0.0};  // degrees, [0, 360)
    double s{0.0};  // [0, 1]
    double v{0.0};  // [0, 1]
};

Hsv rgb_to_hsv(Rgb8 c);

/// Hue in [h0, h1] (wrapping through 0 when h0 > h1), saturation >= min_sat, value >= min_val.
Mask hue_segment(const Image& img, double h0, double h1, double min_sat, double min_val);

/// Pixels of `mask` with a 4-neighbor outside it (the image exterior counts as
/// outside), grown by (thickness - 1) 3x3 dilations.
Mask mask_outline(const Mask& mask, int thickness_px);

enum class CvdDeficiency { protanopia, deuteranopia };

const char* to_string(CvdDeficiency d);

/// Dichromat simulation as a projection in LMS space (idempotent, preserves grays).
Image simulate_cvd(const Image& img, CvdDeficiency d);

/// Error-redistribution daltonization. Throws std::invalid_argument unless strength is in [0, 2].
Image daltonize(const Image& img, CvdDeficiency d, double strength);

/// Linear-RGB simulation matrix used by simulate_cvd (row-major).
std::array<double, 9> cvd_simulation_matrix(CvdDeficiency d);

struct HighlightResult {
    Mask mask;
    /// Unclipped projections of the square's corners; empty if behind the camera.
    std::array<std::optional<PixelCoord>, 4> corners;
    bool off_frame{false};
};

/// Outline of board cell (col, row) in world-camera pixels: the projected quad
/// is filled (pixel centers inside) and its boundary taken with mask_outline.
/// An empty result sets `off_frame`. Throws std::invalid_argument for a cell
/// outside the grid or a non-checkerboard object.
HighlightResult highlight_square(const PinholeCamera& world_cam, const SceneObject& board, int col, int row,
                                 int thickness_px);

/// Masked pixels replaced by `color`. Throws std::invalid_argument on size mismatch.
Image composite(const Image& base, const Mask& mask, Rgb8 color);

}  // namespace epr
