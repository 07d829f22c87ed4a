#pragma once

#include "bidiruin/closedform.hpp"
#include "bidiruin/constant.hpp"
#include "bidiruin/error.hpp"
#include "bidiruin/mc.hpp"
#include "bidiruin/model.hpp"
#include "bidiruin/parallel.hpp"
#include "bidiruin/paths.hpp"
#include "bidiruin/rng.hpp"
