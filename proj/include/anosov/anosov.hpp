#pragma once

#include "error.hpp"
#include "geometry.hpp"
#include "numerics.hpp"
#include "lattice.hpp"
#include "fourier.hpp"
#include "torus_map.hpp"
#include "conjugacy.hpp"
#include "foliation.hpp"
#include "rigidity.hpp"
#include "config.hpp"
#include "report.hpp"
