#pragma once

#include "common.hpp"
#include "config.hpp"
#include "damage.hpp"
#include "dataset.hpp"
#include "inference.hpp"
#include "model.hpp"
#include "state.hpp"
#include "synthetic.hpp"
#include "uncertainty.hpp"
#include "updates.hpp"
