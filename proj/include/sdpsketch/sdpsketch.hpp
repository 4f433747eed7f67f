#pragma once

#include "sdpsketch/bounds.hpp"
#include "sdpsketch/certify.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/experiments.hpp"
#include "sdpsketch/generators.hpp"
#include "sdpsketch/io.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"
#include "sdpsketch/rng.hpp"
#include "sdpsketch/sketch.hpp"
#include "sdpsketch/solver.hpp"
