#pragma once

#include "semor/adaptive.hpp"
#include "semor/analysis.hpp"
#include "semor/errors.hpp"
#include "semor/krylov.hpp"
#include "semor/linalg.hpp"
#include "semor/matrix_market.hpp"
#include "semor/model.hpp"
#include "semor/reduce.hpp"
#include "semor/sdtransform.hpp"
#include "semor/serialize.hpp"
#include "semor/transmission_line.hpp"
