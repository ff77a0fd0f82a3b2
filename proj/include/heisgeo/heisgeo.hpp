#pragma once

#include "heisgeo/collapse.hpp"
#include "heisgeo/errors.hpp"
#include "heisgeo/geodesics.hpp"
#include "heisgeo/io.hpp"
#include "heisgeo/lattice.hpp"
#include "heisgeo/linalg.hpp"
#include "heisgeo/metric.hpp"
#include "heisgeo/moduli.hpp"
#include "heisgeo/parallel.hpp"
#include "heisgeo/selftest.hpp"
#include "heisgeo/systole.hpp"
#include "heisgeo/volumes.hpp"
