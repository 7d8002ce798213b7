#pragma once

#include "mpass/bisection.hpp"
#include "mpass/closest_pair.hpp"
#include "mpass/derivatives.hpp"
#include "mpass/diagnostics.hpp"
#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/hyperplane.hpp"
#include "mpass/linalg.hpp"
#include "mpass/local.hpp"
#include "mpass/matrix_io.hpp"
#include "mpass/path.hpp"
#include "mpass/problems.hpp"
#include "mpass/segment.hpp"
#include "mpass/wilkinson.hpp"
