#include "gridrisk/fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#ifndef GRIDRISK_FIXTURE_DIR
#define GRIDRISK_FIXTURE_DIR "fixtures"
#endif

namespace gridrisk {

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {
        "eight_node",
        "eight_node_plus_line_2_4",
        "eight_node_doubled_3_4",
        "eight_node_noise_1_2",
        "eight_node_demand_59",
        "ring_symmetric",
        "ring_asymmetric",
        "manhattan_symmetric",
        "manhattan_asymmetric_demand",
        "manhattan_asymmetric_noise",
    };
    return names;
}

std::string fixture_path(const std::string& name) {
    const auto& names = fixture_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw std::out_of_range("unknown fixture: " + name);
    const char* root = std::getenv("GRIDRISK_FIXTURE_DIR");
    return std::string(root ? root : GRIDRISK_FIXTURE_DIR) + "/" + name + ".json";
}

DispatchProblem fixture(const std::string& name) { return load_network(fixture_path(name)); }

}  // namespace gridrisk
