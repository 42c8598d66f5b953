#pragma once

#include "oplab/capacity.hpp"
#include "oplab/checks.hpp"
#include "oplab/domain.hpp"
#include "oplab/errors.hpp"
#include "oplab/io.hpp"
#include "oplab/linear.hpp"
#include "oplab/measure.hpp"
#include "oplab/norms.hpp"
#include "oplab/obstacle.hpp"
#include "oplab/operator.hpp"
#include "oplab/oracles.hpp"
#include "oplab/scenarios.hpp"
#include "oplab/vi.hpp"
