#pragma once

#include "hmmdecode/error.hpp"
#include "hmmdecode/prob.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/inference.hpp"
#include "hmmdecode/footprint.hpp"
#include "hmmdecode/set_decode.hpp"
#include "hmmdecode/walks.hpp"
#include "hmmdecode/reductions.hpp"
#include "hmmdecode/io.hpp"
