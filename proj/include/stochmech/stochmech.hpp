#pragma once

#include "stochmech/csv.hpp"
#include "stochmech/errors.hpp"
#include "stochmech/experiments.hpp"
#include "stochmech/field.hpp"
#include "stochmech/histogram.hpp"
#include "stochmech/langevin.hpp"
#include "stochmech/physics.hpp"
#include "stochmech/rng.hpp"
