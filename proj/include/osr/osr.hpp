#pragma once

#include "osr/blend.hpp"
#include "osr/error.hpp"
#include "osr/filters.hpp"
#include "osr/image.hpp"
#include "osr/io.hpp"
#include "osr/metrics.hpp"
#include "osr/patches.hpp"
#include "osr/pyramid.hpp"
#include "osr/rng.hpp"
#include "osr/serialize.hpp"
#include "osr/training.hpp"
