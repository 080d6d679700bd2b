#pragma once

// Route the conventional <nlohmann/json.hpp> spelling to the vendored
// single-header bundle so every translation unit compiles the same copy.
#include <json.hpp>
