#pragma once

#include "terrarast/align.hpp"
#include "terrarast/ascii.hpp"
#include "terrarast/config.hpp"
#include "terrarast/csf.hpp"
#include "terrarast/delaunay.hpp"
#include "terrarast/dtr.hpp"
#include "terrarast/error.hpp"
#include "terrarast/eval.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/grid.hpp"
#include "terrarast/groundfilter.hpp"
#include "terrarast/las.hpp"
#include "terrarast/manifest.hpp"
#include "terrarast/mask_io.hpp"
#include "terrarast/pointcloud.hpp"
#include "terrarast/predicates.hpp"
#include "terrarast/rasterize.hpp"
#include "terrarast/synth.hpp"
#include "terrarast/tin.hpp"
