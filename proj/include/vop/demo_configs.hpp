#pragma once

#include <string_view>

namespace vop {

// Configuration files shipped with the tool, embedded at build time.
std::string_view demo_discordance_yaml();
std::string_view reference_config_yaml();

}  // namespace vop
