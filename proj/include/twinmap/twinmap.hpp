#pragma once

#include "twinmap/cloud_io.hpp"
#include "twinmap/config.hpp"
#include "twinmap/error.hpp"
#include "twinmap/evaluation.hpp"
#include "twinmap/geometry.hpp"
#include "twinmap/point_cloud.hpp"
#include "twinmap/registration.hpp"
#include "twinmap/scene.hpp"
#include "twinmap/spatial_index.hpp"
#include "twinmap/trajectory.hpp"
#include "twinmap/visibility.hpp"
#include "twinmap/voxel_grid.hpp"
