#pragma once
#include <stdexcept>

namespace clt {

// config file / CLI argument problems -> exit code 2
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
// file system / format problems -> exit code 3
struct IoError : std::runtime_error { using std::runtime_error::runtime_error; };
// non-finite losses during training -> exit code 4
struct DivergenceError : std::runtime_error { using std::runtime_error::runtime_error; };

}
