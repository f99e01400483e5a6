#pragma once

#include "fracinit/signal.hpp"
#include "fracinit/gl.hpp"
#include "fracinit/regressor.hpp"
#include "fracinit/estimator.hpp"
