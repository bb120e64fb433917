#pragma once

#include "refdeblur/core/random.hpp"
#include "refdeblur/dataset/sampler.hpp"

namespace refdeblur {

/// A concrete crop rectangle plus flip flags.
struct CropFlip {
    std::size_t x = 0, y = 0, size = 256;
    bool flip_h = false;
    bool flip_v = false;
};

inline ImageBuf apply_crop_flip(const ImageBuf& img, const CropFlip& cf) {
    if (cf.x + cf.size > img.width() || cf.y + cf.size > img.height()) {
        throw DegenerateSizeError("crop of " + std::to_string(cf.size) + " at (" + std::to_string(cf.x) + "," +
                                  std::to_string(cf.y) + ") exceeds " + img.shape_string());
    }
    ImageBuf out(cf.size, cf.size, img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < cf.size; ++y)
            for (std::size_t x = 0; x < cf.size; ++x) {
                const std::size_t sx = cf.flip_h ? cf.size - 1 - x : x;
                const std::size_t sy = cf.flip_v ? cf.size - 1 - y : y;
                out(x, y, c) = img(cf.x + sx, cf.y + sy, c);
            }
    return out;
}

inline CropFlip draw_crop_flip(std::size_t height, std::size_t width, Rng& rng, std::size_t size = 256) {
    if (height < size || width < size) {
        throw DegenerateSizeError("image " + std::to_string(height) + "x" + std::to_string(width) +
                                  " smaller than a " + std::to_string(size) + " crop");
    }
    CropFlip cf;
    cf.size = size;
    cf.x = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(width - size)));
    cf.y = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(height - size)));
    cf.flip_h = bernoulli(rng, 0.5);
    cf.flip_v = bernoulli(rng, 0.5);
    return cf;
}

/// Same random square and flips applied to the blurry target and its reference.
inline SamplePair crop_flip(const SamplePair& pair, Rng& rng, std::size_t size = 256) {
    if (!pair.blur.same_grid(pair.ref.height(), pair.ref.width())) {
        throw ContractViolation("blur " + pair.blur.shape_string() + " and reference " + pair.ref.shape_string() +
                                " differ in size");
    }
    const CropFlip cf = draw_crop_flip(pair.blur.height(), pair.blur.width(), rng, size);
    SamplePair out = pair;
    out.blur = apply_crop_flip(pair.blur, cf);
    out.ref = apply_crop_flip(pair.ref, cf);
    return out;
}

}  // namespace refdeblur
