#pragma once

// Loads the reference tables shipped under data/.

#include "json.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace fixtures {

inline nlohmann::json load(std::string const & name)
{
    std::string path = std::string(MQE_DATA_DIR) + "/" + name;
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open fixture " + path);
    }
    return nlohmann::json::parse(in);
}

} // namespace fixtures
