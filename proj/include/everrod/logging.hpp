#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace everrod {

// Library-wide logger. The level comes from the EVERROD_LOG environment
// variable (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& logger();

}  // namespace everrod
