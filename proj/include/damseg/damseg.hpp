#pragma once

#include "damseg/edges.hpp"
#include "damseg/error.hpp"
#include "damseg/genbridge.hpp"
#include "damseg/labels.hpp"
#include "damseg/mask.hpp"
#include "damseg/metrics.hpp"
#include "damseg/parallel.hpp"
#include "damseg/pipeline.hpp"
#include "damseg/png_io.hpp"
#include "damseg/raster.hpp"
#include "damseg/report.hpp"
