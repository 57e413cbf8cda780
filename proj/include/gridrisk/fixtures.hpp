#pragma once

#include "gridrisk/network.hpp"

#include <string>
#include <vector>

namespace gridrisk {

/// Names of the bundled example networks (files under fixtures/).
const std::vector<std::string>& fixture_names();

/// Absolute path of a fixture file; throws std::out_of_range for unknown
/// names.
std::string fixture_path(const std::string& name);

/// Loads a bundled network through the regular file loader.
DispatchProblem fixture(const std::string& name);

}  // namespace gridrisk
