#include "epr/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epr/parallel.hpp"

namespace epr {

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

std::string encode_mask_pgm(const Mask& mask) {
    std::vector<std::uint8_t> gray(mask.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits[i] ? 255 : 0;
    return encode_pgm(mask.width, mask.height, gray);
}

std::vector<std::uint8_t> luma(const Image& img) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const unsigned r = img.rgb[3 * i], g = img.rgb[3 * i + 1], b = img.rgb[3 * i + 2];
        out[i] = static_cast<std::uint8_t>((77 * r + 150 * g + 29 * b) >> 8);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canny

namespace {

std::vector<double> gaussian_blur(const std::vector<std::uint8_t>& src, int w, int h, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double g = std::exp(-(k * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = g;
        sum += g;
    }
    for (auto& g : kernel) g /= sum;

    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
    std::vector<double> tmp(src.size());
    std::vector<double> out(src.size());
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * src[idx(std::clamp(x + k, 0, w - 1), y)];
            }
            tmp[idx(x, y)] = acc;
        }
    });
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[idx(x, std::clamp(y + k, 0, h - 1))];
            }
            out[idx(x, y)] = acc;
        }
    });
    return out;
}

struct Gradients {
    std::vector<double> gx, gy, mag;
};

Gradients sobel(const std::vector<double>& p, int w, int h) {
    Gradients g{std::vector<double>(p.size()), std::vector<double>(p.size()), std::vector<double>(p.size())};
    auto at = [&](int x, int y) {
        return p[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(std::clamp(x, 0, w - 1))];
    };
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            const std::size_t i = row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.mag[i] = std::hypot(gx, gy);
        }
    });
    return g;
}

}  // namespace

std::vector<double> canny_gradient_magnitude(const Image& img, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("canny: sigma must be positive");
    return sobel(gaussian_blur(luma(img), img.width, img.height, sigma), img.width, img.height).mag;
}

Mask canny(const Image& img, const CannyParams& params) {
    if (!(params.low > 0.0) || !(params.low <= params.high)) {
        throw std::invalid_argument("canny: thresholds must satisfy 0 < low <= high");
    }
    if (!(params.sigma > 0.0)) throw std::invalid_argument("canny: sigma must be positive");
    const int w = img.width;
    const int h = img.height;
    Mask out(w, h);
    if (w < 3 || h < 3) return out;

    const Gradients g = sobel(gaussian_blur(luma(img), w, h, params.sigma), w, h);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

    // 0 = suppressed, 1 = weak, 2 = strong
    std::vector<std::uint8_t> cls(g.mag.size(), 0);
    parallel_for(static_cast<std::size_t>(h - 2), [&](std::size_t r) {
        const int y = static_cast<int>(r) + 1;
        for (int x = 1; x < w - 1; ++x) {
            const double m = g.mag[idx(x, y)];
            if (m < params.low) continue;
            double angle = std::atan2(g.gy[idx(x, y)], g.gx[idx(x, y)]) * 180.0 / 3.14159265358979323846;
            if (angle < 0.0) angle += 180.0;
            int dx = 1, dy = 0;
            if (angle >= 22.5 && angle < 67.5) {
                dx = 1; dy = 1;
            } else if (angle >= 67.5 && angle < 112.5) {
                dx = 0; dy = 1;
            } else if (angle >= 112.5 && angle < 157.5) {
                dx = -1; dy = 1;
            }
            // strict on one side so that two-pixel plateaus thin to one pixel
            const double before = g.mag[idx(x - dx, y - dy)];
            const double after = g.mag[idx(x + dx, y + dy)];
            if (!(m > before && m >= after)) continue;
            cls[idx(x, y)] = m >= params.high ? 2 : 1;
        }
    });

    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < cls.size(); ++i) {
        if (cls[i] == 2) {
            out.bits[i] = 1;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        for (int ny = y - 1; ny <= y + 1; ++ny) {
            for (int nx = x - 1; nx <= x + 1; ++nx) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = idx(nx, ny);
                if (cls[j] == 1 && !out.bits[j]) {
                    out.bits[j] = 1;
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hue segmentation and outlines

Hsv rgb_to_hsv(Rgb8 c) {
    // integer differences and one division each, so results are correctly rounded
    const int r = c.r, g = c.g, b = c.b;
    const int mx = std::max({r, g, b});
    const int delta = mx - std::min({r, g, b});
    Hsv out;
    out.v = mx / 255.0;
    out.s = mx > 0 ? static_cast<double>(delta) / mx : 0.0;
    if (delta > 0) {
        int num;
        if (mx == r) {
            num = 60 * (g - b);
            if (num < 0) num += 360 * delta;
        } else if (mx == g) {
            num = 60 * (b - r) + 120 * delta;
        } else {
            num = 60 * (r - g) + 240 * delta;
        }
        out.h = static_cast<double>(num) / delta;
        if (out.h >= 360.0) out.h -= 360.0;
    }
    return out;
}

Mask hue_segment(const Image& img, double h0, double h1, double min_sat, double min_val) {
    if (!(h0 >= 0.0 && h0 < 360.0 && h1 >= 0.0 && h1 < 360.0)) {
        throw std::invalid_argument("hue_segment: hue bounds must lie in [0, 360)");
    }
    Mask out(img.width, img.height);
    const bool wraps = h0 > h1;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Hsv hsv = rgb_to_hsv(img.at(x, y));
            const bool in_range = wraps ? (hsv.h >= h0 || hsv.h <= h1) : (hsv.h >= h0 && hsv.h <= h1);
            out.set(x, y, in_range && hsv.s >= min_sat && hsv.v >= min_val);
        }
    }
    return out;
}

Mask mask_outline(const Mask& mask, int thickness_px) {
    if (thickness_px < 1) throw std::invalid_argument("mask_outline: thickness must be >= 1");
    Mask edge(mask.width, mask.height);
    auto outside = [&](int x, int y) { return !mask.inside(x, y) || !mask.at(x, y); };
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            if (outside(x - 1, y) || outside(x + 1, y) || outside(x, y - 1) || outside(x, y + 1)) edge.set(x, y, true);
        }
    }
    for (int pass = 1; pass < thickness_px; ++pass) {
        Mask grown = edge;
        for (int y = 0; y < edge.height; ++y) {
            for (int x = 0; x < edge.width; ++x) {
                if (!edge.at(x, y)) continue;
                for (int ny = y - 1; ny <= y + 1; ++ny)
                    for (int nx = x - 1; nx <= x + 1; ++nx)
                        if (grown.inside(nx, ny)) grown.set(nx, ny, true);
            }
        }
        edge = std::move(grown);
    }
    return edge;
}

// ---------------------------------------------------------------------------
// Color vision deficiency

namespace {

using M3 = std::array<double, 9>;

M3 mul(const M3& a, const M3& b) {
    M3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
    return r;
}

M3 inv(const M3& a) {
    Mat3 m;
    m.m = a;
    return m.inverse().m;
}

std::array<double, 3> mat_apply(const M3& m, const std::array<double, 3>& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

// Linear sRGB -> CIE XYZ (D65), IEC 61966-2-1:1999.
constexpr M3 kRgbToXyz{0.4124, 0.3576, 0.1805, 0.2126, 0.7152, 0.0722, 0.0193, 0.1192, 0.9505};

// CIE XYZ -> LMS, Hunt-Pointer-Estevez (Hunt, "The Reproduction of Colour", 6th ed., 2004).
constexpr M3 kXyzToLms{0.38971, 0.68898, -0.07868, -0.22981, 1.18340, 0.04641, 0.0, 0.0, 1.0};

struct CvdTables {
    M3 rgb_to_lms;
    M3 lms_to_rgb;
    M3 protan;
    M3 deutan;
    std::array<double, 256> decode;
};

// The lost cone response is rebuilt from the two remaining ones so that the
// display white and the blue primary map to themselves (Vienot, Brettel & Mollon 1999).
// Applying it twice changes nothing.
M3 dichromat_projection(const M3& rgb_to_lms, int missing) {
    const auto white = mat_apply(rgb_to_lms, {1.0, 1.0, 1.0});
    const auto blue = mat_apply(rgb_to_lms, {0.0, 0.0, 1.0});
    const int a = missing == 0 ? 1 : 0;
    const int b = 2;
    // solve white[missing] = p*white[a] + q*white[b], blue[missing] = p*blue[a] + q*blue[b]
    const double det = white[a] * blue[b] - white[b] * blue[a];
    const double p = (white[missing] * blue[b] - white[b] * blue[missing]) / det;
    const double q = (white[a] * blue[missing] - white[missing] * blue[a]) / det;
    M3 proj{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (int k = 0; k < 3; ++k) proj[missing * 3 + k] = 0.0;
    proj[missing * 3 + a] = p;
    proj[missing * 3 + b] = q;
    const M3 lms_to_rgb = inv(rgb_to_lms);
    return mul(lms_to_rgb, mul(proj, rgb_to_lms));
}

const CvdTables& tables() {
    static const CvdTables t = [] {
        CvdTables out{};
        out.rgb_to_lms = mul(kXyzToLms, kRgbToXyz);
        out.lms_to_rgb = inv(out.rgb_to_lms);
        out.protan = dichromat_projection(out.rgb_to_lms, 0);
        out.deutan = dichromat_projection(out.rgb_to_lms, 1);
        for (int i = 0; i < 256; ++i) {
            const double c = i / 255.0;
            out.decode[static_cast<std::size_t>(i)] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
        return out;
    }();
    return t;
}

std::uint8_t encode_srgb(double linear) {
    const double c = std::clamp(linear, 0.0, 1.0);
    const double e = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
    return static_cast<std::uint8_t>(std::clamp(std::floor(e * 255.0 + 0.5), 0.0, 255.0));
}

const M3& sim_matrix(CvdDeficiency d) {
    return d == CvdDeficiency::protanopia ? tables().protan : tables().deutan;
}

std::array<double, 3> decode_px(const Image& img, std::size_t i) {
    const auto& dec = tables().decode;
    return {dec[img.rgb[3 * i]], dec[img.rgb[3 * i + 1]], dec[img.rgb[3 * i + 2]]};
}

std::array<double, 3> clamp01(std::array<double, 3> v) {
    for (auto& c : v) c = std::clamp(c, 0.0, 1.0);
    return v;
}

}  // namespace

const char* to_string(CvdDeficiency d) { return d == CvdDeficiency::protanopia ? "protanopia" : "deuteranopia"; }

std::array<double, 9> cvd_simulation_matrix(CvdDeficiency d) { return sim_matrix(d); }

Image simulate_cvd(const Image& img, CvdDeficiency d) {
    const M3& m = sim_matrix(d);
    Image out(img.width, img.height);
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = mat_apply(m, decode_px(img, i));
        for (int c = 0; c < 3; ++c) out.rgb[3 * i + static_cast<std::size_t>(c)] = encode_srgb(s[static_cast<std::size_t>(c)]);
    }
    return out;
}

Image daltonize(const Image& img, CvdDeficiency d, double strength) {
    if (!(strength >= 0.0 && strength <= 2.0)) throw std::invalid_argument("daltonize: strength must lie in [0, 2]");
    if (strength == 0.0) return img;
    // Fidaner, Lin & Ozguven 2005: shift the invisible red/green error toward green and blue
    constexpr M3 kRedistribute{0.0, 0.0, 0.0, 0.7, 1.0, 0.0, 0.7, 0.0, 1.0};
    const M3& m = sim_matrix(d);
    Image out(img.width, img.height);
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    for (std::size_t i = 0; i < n; ++i) {
        const auto lin = decode_px(img, i);
        const auto sim = clamp01(mat_apply(m, lin));
        const std::array<double, 3> err{lin[0] - sim[0], lin[1] - sim[1], lin[2] - sim[2]};
        const auto shift = mat_apply(kRedistribute, err);
        for (int c = 0; c < 3; ++c) {
            const auto k = static_cast<std::size_t>(c);
            out.rgb[3 * i + k] = encode_srgb(lin[k] + strength * shift[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Study-task overlays

HighlightResult highlight_square(const PinholeCamera& world_cam, const SceneObject& board, int col, int row,
                                 int thickness_px) {
    const auto* cb = std::get_if<Checkerboard>(&board.material);
    if (!cb) throw std::invalid_argument("highlight_square: object is not a checkerboard");
    if (col < 0 || row < 0 || col >= cb->cols || row >= cb->rows) {
        throw std::invalid_argument("highlight_square: cell outside the board grid");
    }
    HighlightResult res;
    res.mask = Mask(world_cam.width(), world_cam.height());
    const auto corners3d = cb->square_corners(col, row);
    bool all_in_front = true;
    for (std::size_t k = 0; k < 4; ++k) {
        res.corners[k] = world_cam.project_unclipped(corners3d[k]);
        all_in_front = all_in_front && res.corners[k].has_value();
    }
    if (!all_in_front) {
        res.off_frame = true;
        return res;
    }

    double lo_u = res.corners[0]->u, hi_u = lo_u, lo_v = res.corners[0]->v, hi_v = lo_v;
    for (const auto& c : res.corners) {
        lo_u = std::min(lo_u, c->u);
        hi_u = std::max(hi_u, c->u);
        lo_v = std::min(lo_v, c->v);
        hi_v = std::max(hi_v, c->v);
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(lo_u)));
    const int x1 = std::min(world_cam.width() - 1, static_cast<int>(std::floor(hi_u)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(lo_v)));
    const int y1 = std::min(world_cam.height() - 1, static_cast<int>(std::floor(hi_v)));

    // signed edge functions; the quad is convex, either winding
    auto edge = [&](std::size_t k, double x, double y) {
        const PixelCoord& a = *res.corners[k];
        const PixelCoord& b = *res.corners[(k + 1) % 4];
        return (b.u - a.u) * (y - a.v) - (b.v - a.v) * (x - a.u);
    };
    Mask fill(world_cam.width(), world_cam.height());
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            bool pos = true, neg = true;
            for (std::size_t k = 0; k < 4; ++k) {
                const double e = edge(k, x, y);
                pos = pos && e >= 0.0;
                neg = neg && e <= 0.0;
            }
            if (pos || neg) fill.set(x, y, true);
        }
    }
    if (fill.count() == 0) {
        res.off_frame = true;
        return res;
    }
    res.mask = mask_outline(fill, thickness_px);
    return res;
}

Image composite(const Image& base, const Mask& mask, Rgb8 color) {
    if (base.width != mask.width || base.height != mask.height) {
        throw std::invalid_argument("composite: mask and image sizes differ");
    }
    Image out = base;
    for (int y = 0; y < base.height; ++y)
        for (int x = 0; x < base.width; ++x)
            if (mask.at(x, y)) out.set(x, y, color);
    return out;
}

}  // namespace epr
