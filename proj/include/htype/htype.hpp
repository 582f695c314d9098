#pragma once

// Umbrella header for the library (everything except the CLI front end).

#include "htype/clifford.hpp"
#include "htype/connection.hpp"
#include "htype/errors.hpp"
#include "htype/fields.hpp"
#include "htype/flat_model.hpp"
#include "htype/group.hpp"
#include "htype/io.hpp"
#include "htype/jet.hpp"
#include "htype/linalg.hpp"
#include "htype/projectors.hpp"
#include "htype/random.hpp"
#include "htype/reports.hpp"
#include "htype/yamabe.hpp"
