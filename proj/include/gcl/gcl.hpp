// Umbrella header.
#pragma once

#include "gcl/complex.hpp"
#include "gcl/spacetime.hpp"
#include "gcl/cochain.hpp"
#include "gcl/hodge.hpp"
#include "gcl/conservation.hpp"
#include "gcl/models.hpp"
#include "gcl/stepper.hpp"
#include "gcl/expr.hpp"
#include "gcl/io.hpp"
#include "gcl/config.hpp"
