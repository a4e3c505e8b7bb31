#pragma once

#include "cafewall/field.hpp"
#include "cafewall/stimulus.hpp"
#include "cafewall/dogfilter.hpp"
#include "cafewall/hough.hpp"
#include "cafewall/tiltanalysis.hpp"
#include "cafewall/image_io.hpp"
#include "cafewall/render.hpp"
#include "cafewall/report.hpp"
#include "cafewall/pipeline.hpp"
