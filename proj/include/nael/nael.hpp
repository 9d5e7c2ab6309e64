#pragma once

#include "nael/adapt.hpp"
#include "nael/categorical.hpp"
#include "nael/errors.hpp"
#include "nael/ethica.hpp"
#include "nael/formula.hpp"
#include "nael/generative_model.hpp"
#include "nael/global.hpp"
#include "nael/infer.hpp"
#include "nael/norms.hpp"
#include "nael/opinion.hpp"
#include "nael/params.hpp"
#include "nael/rng.hpp"
#include "nael/scenario.hpp"
#include "nael/sim.hpp"
#include "nael/toml.hpp"
#include "nael/trace.hpp"
#include "nael/valley.hpp"
