#ifndef POPKOLMO_POPKOLMO_HPP
#define POPKOLMO_POPKOLMO_HPP

#include "popkolmo/aggregation.hpp"
#include "popkolmo/eigenvalues.hpp"
#include "popkolmo/error.hpp"
#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/linalg.hpp"
#include "popkolmo/matrix.hpp"
#include "popkolmo/simulation.hpp"
#include "popkolmo/spectral.hpp"
#include "popkolmo/structure.hpp"

#endif  // POPKOLMO_POPKOLMO_HPP
