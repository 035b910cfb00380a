#pragma once

#include "rctv/cube.hpp"
#include "rctv/cube_io.hpp"
#include "rctv/diffops.hpp"
#include "rctv/errors.hpp"
#include "rctv/linalg.hpp"
#include "rctv/metrics.hpp"
#include "rctv/noise.hpp"
#include "rctv/parallel.hpp"
#include "rctv/rank.hpp"
#include "rctv/rng.hpp"
#include "rctv/serialize.hpp"
#include "rctv/solver.hpp"
#include "rctv/synthetic.hpp"
#include "rctv/version.hpp"
