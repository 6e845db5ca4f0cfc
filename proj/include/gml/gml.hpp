// gml.hpp - umbrella header.

#ifndef GML_GML_HPP
#define GML_GML_HPP

#include "gml/errors.hpp"
#include "gml/flight.hpp"
#include "gml/newton.hpp"
#include "gml/relaxation.hpp"
#include "gml/shooting.hpp"
#include "gml/systems.hpp"
#include "gml/types.hpp"

#endif  // GML_GML_HPP
