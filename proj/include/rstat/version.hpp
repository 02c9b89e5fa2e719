#ifndef RSTAT_VERSION_HPP
#define RSTAT_VERSION_HPP

namespace rstat {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
