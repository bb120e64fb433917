#pragma once

#include "refdeblur/errors.hpp"
#include "refdeblur/core/parallel.hpp"
#include "refdeblur/core/pyramid.hpp"
#include "refdeblur/core/random.hpp"
#include "refdeblur/core/resample.hpp"
#include "refdeblur/core/tensor.hpp"
#include "refdeblur/io/binary.hpp"
#include "refdeblur/io/dump.hpp"
#include "refdeblur/io/image_io.hpp"
#include "refdeblur/features/conv.hpp"
#include "refdeblur/features/extractor.hpp"
#include "refdeblur/features/ref_encoder.hpp"
#include "refdeblur/features/weights.hpp"
#include "refdeblur/matcher/match.hpp"
#include "refdeblur/matcher/patch.hpp"
#include "refdeblur/fusion/fuse.hpp"
#include "refdeblur/fusion/warp.hpp"
#include "refdeblur/metrics/dft.hpp"
#include "refdeblur/metrics/losses.hpp"
#include "refdeblur/metrics/quality.hpp"
#include "refdeblur/metrics/sharpness.hpp"
#include "refdeblur/dataset/augment.hpp"
#include "refdeblur/dataset/elect.hpp"
#include "refdeblur/dataset/sampler.hpp"
#include "refdeblur/dataset/scene.hpp"
#include "refdeblur/pipeline/backbone.hpp"
#include "refdeblur/pipeline/bench.hpp"
#include "refdeblur/pipeline/enrich.hpp"
#include "refdeblur/pipeline/grad_check.hpp"
#include "refdeblur/pipeline/weights_init.hpp"
