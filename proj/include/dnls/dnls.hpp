#pragma once

#include "dnls/grid.hpp"
#include "dnls/fft.hpp"
#include "dnls/field.hpp"
#include "dnls/problem.hpp"
#include "dnls/transforms.hpp"
#include "dnls/cutoff.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/criteria.hpp"
#include "dnls/solver.hpp"
#include "dnls/snapshot.hpp"
#include "dnls/experiments.hpp"
