#pragma once

#include "cosetwalk/boundary.hpp"
#include "cosetwalk/cover.hpp"
#include "cosetwalk/entropy.hpp"
#include "cosetwalk/errors.hpp"
#include "cosetwalk/group.hpp"
#include "cosetwalk/io.hpp"
#include "cosetwalk/parallel.hpp"
#include "cosetwalk/rng.hpp"
#include "cosetwalk/spaces.hpp"
#include "cosetwalk/verify.hpp"
