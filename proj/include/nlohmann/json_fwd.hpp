#pragma once

// Adapter for the canonical forward-declaration path. The vendored copy is a
// single header, so the full definition stands in for the forward header;
// this costs compile time only.
#include <json.hpp>
