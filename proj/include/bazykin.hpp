#pragma once

#include "bazykin/errors.hpp"
#include "bazykin/model.hpp"
#include "bazykin/integrator.hpp"
#include "bazykin/equilibria.hpp"
#include "bazykin/bifurcation.hpp"
#include "bazykin/dynamics.hpp"
#include "bazykin/diagram.hpp"
#include "bazykin/io.hpp"
