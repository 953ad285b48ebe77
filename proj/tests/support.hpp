#pragma once

#include <cstdint>

#include "epr/random.hpp"
#include "epr/scene.hpp"

namespace epr::test {

inline Image random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Image img(w, h);
    for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

inline RigConfig rig_with_offset(const Vec3& offset) {
    RigConfig c;
    c.camera_offset_m = offset;
    return c;
}

}  // namespace epr::test
