#pragma once

#include "error.hpp"
#include "estimator.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "local_poly.hpp"
#include "pilot.hpp"
#include "sample.hpp"
#include "selector.hpp"
#include "simlab.hpp"
