#pragma once

// Adapter: the vendored single-header JSON library sits flat in vendor/,
// while sources use the library's canonical include path.
#include <json.hpp>
