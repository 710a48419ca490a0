#pragma once

#include "fmgls/biam.hpp"
#include "fmgls/dgp.hpp"
#include "fmgls/error.hpp"
#include "fmgls/estimators.hpp"
#include "fmgls/experiment.hpp"
#include "fmgls/inference.hpp"
#include "fmgls/limit_distribution.hpp"
#include "fmgls/lrcov.hpp"
#include "fmgls/model.hpp"
#include "fmgls/rng.hpp"
