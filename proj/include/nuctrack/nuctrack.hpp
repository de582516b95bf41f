#pragma once

#include "nuctrack/autothresh.hpp"
#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"
#include "nuctrack/image_io.hpp"
#include "nuctrack/imgproc.hpp"
#include "nuctrack/overlay.hpp"
#include "nuctrack/parallel.hpp"
#include "nuctrack/pipeline.hpp"
#include "nuctrack/regions.hpp"
#include "nuctrack/signal.hpp"
#include "nuctrack/synth.hpp"
#include "nuctrack/tracker.hpp"
