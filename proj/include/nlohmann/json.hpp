#pragma once

// canonical spelling for the vendored single-header json library
#include <json.hpp>
