#pragma once

#include "isle/canny.hpp"
#include "isle/color.hpp"
#include "isle/config.hpp"
#include "isle/eval.hpp"
#include "isle/image.hpp"
#include "isle/io.hpp"
#include "isle/l0smooth.hpp"
#include "isle/linework.hpp"
#include "isle/maskops.hpp"
#include "isle/pipeline.hpp"
#include "isle/ssim.hpp"
