#pragma once

#include "amplitude.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "interference.hpp"
#include "report.hpp"
#include "rounding.hpp"
#include "stats.hpp"
#include "synthetic.hpp"
#include "trial_model.hpp"
