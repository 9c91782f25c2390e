#pragma once

#include "eitcool/types.hpp"
#include "eitcool/hilbert_space.hpp"
#include "eitcool/operators.hpp"
#include "eitcool/superoperator.hpp"
#include "eitcool/linalg.hpp"
#include "eitcool/full_model.hpp"
#include "eitcool/dark_state.hpp"
#include "eitcool/steady_state.hpp"
#include "eitcool/dynamics.hpp"
#include "eitcool/cooling.hpp"
#include "eitcool/analytic.hpp"
#include "eitcool/config.hpp"
#include "eitcool/sweep.hpp"
#include "eitcool/output.hpp"
