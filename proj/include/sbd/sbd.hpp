#pragma once

#include "sbd/averaged.hpp"
#include "sbd/conditions.hpp"
#include "sbd/config.hpp"
#include "sbd/errors.hpp"
#include "sbd/experiments.hpp"
#include "sbd/geometry.hpp"
#include "sbd/hierarchy.hpp"
#include "sbd/io.hpp"
#include "sbd/models.hpp"
#include "sbd/potentials.hpp"
#include "sbd/random.hpp"
#include "sbd/regime.hpp"
#include "sbd/simulator.hpp"
