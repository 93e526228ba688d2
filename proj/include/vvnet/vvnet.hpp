#pragma once

// Umbrella header for the whole pipeline.

#include "vvnet/common.hpp"
#include "vvnet/config.hpp"
#include "vvnet/gconv.hpp"
#include "vvnet/group.hpp"
#include "vvnet/harness.hpp"
#include "vvnet/io.hpp"
#include "vvnet/metrics.hpp"
#include "vvnet/nn.hpp"
#include "vvnet/pointcloud.hpp"
#include "vvnet/segnet.hpp"
#include "vvnet/synth.hpp"
#include "vvnet/tensor.hpp"
#include "vvnet/vae.hpp"
#include "vvnet/voxelizer.hpp"
