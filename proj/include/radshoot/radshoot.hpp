#pragma once

#include "radshoot/error.hpp"
#include "radshoot/nonlinearity.hpp"
#include "radshoot/landscape.hpp"
#include "radshoot/jump.hpp"
#include "radshoot/conditions.hpp"
#include "radshoot/integrator.hpp"
#include "radshoot/classifier.hpp"
#include "radshoot/diagnostics.hpp"
#include "radshoot/finder.hpp"
#include "radshoot/io.hpp"
