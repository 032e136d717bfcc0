#pragma once

#include "finsler/catalog.hpp"
#include "finsler/construct.hpp"
#include "finsler/norms.hpp"
#include "finsler/solver.hpp"
#include "finsler/verify.hpp"
