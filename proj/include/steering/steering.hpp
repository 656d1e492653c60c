#pragma once

// Umbrella header: the whole library in one include.

#include <steering/assemblage.hpp>
#include <steering/conversions.hpp>
#include <steering/entropy.hpp>
#include <steering/errors.hpp>
#include <steering/json_io.hpp>
#include <steering/lhs.hpp>
#include <steering/matrix.hpp>
#include <steering/monotones.hpp>
#include <steering/parallel.hpp>
#include <steering/prob_table.hpp>
#include <steering/random.hpp>
#include <steering/sdp.hpp>
#include <steering/snio.hpp>
#include <steering/suite.hpp>
