#pragma once

#include "wedgelab/background.hpp"
#include "wedgelab/calculus.hpp"
#include "wedgelab/corpus.hpp"
#include "wedgelab/elliptic.hpp"
#include "wedgelab/energy.hpp"
#include "wedgelab/error.hpp"
#include "wedgelab/field.hpp"
#include "wedgelab/grid.hpp"
#include "wedgelab/jet.hpp"
#include "wedgelab/ode.hpp"
#include "wedgelab/reduction.hpp"
#include "wedgelab/remainder.hpp"
#include "wedgelab/ridge.hpp"
#include "wedgelab/stencil.hpp"
#include "wedgelab/verify.hpp"
