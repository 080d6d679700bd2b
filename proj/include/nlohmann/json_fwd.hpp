#pragma once

// The vendored bundle ships no separate forward-declaration header; the
// full header is cheap enough at this project size.
#include <json.hpp>
