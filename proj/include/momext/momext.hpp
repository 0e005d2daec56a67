#ifndef MOMEXT_MOMEXT_HPP
#define MOMEXT_MOMEXT_HPP

#include "momext/rational.hpp"
#include "momext/poly.hpp"
#include "momext/extalg.hpp"
#include "momext/psd.hpp"
#include "momext/functionals.hpp"
#include "momext/feasibility.hpp"
#include "momext/recovery.hpp"
#include "momext/fibres.hpp"
#include "momext/semigroups.hpp"

#endif  // MOMEXT_MOMEXT_HPP
