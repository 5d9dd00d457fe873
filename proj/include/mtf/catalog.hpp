#pragma once

#include "mtf/system.hpp"

namespace mtf {

struct PlanarSystem;  // planar.hpp

// Built-in example systems.  Linear: double-integrator, triple-integrator,
// harmonic, double-integrator-2input.  Planar: planar-pendulum.
std::vector<std::string> catalog_names();
bool catalog_is_planar(const std::string& name);
LinearSystem catalog_linear(const std::string& name);
PlanarSystem catalog_planar(const std::string& name);

// Resolves "catalog:<name>" or a filesystem path to a linear system.
LinearSystem resolve_linear_system(const std::string& ref);

}  // namespace mtf
