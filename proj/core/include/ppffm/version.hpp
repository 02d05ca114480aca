#ifndef PPFFM_VERSION_HPP_
#define PPFFM_VERSION_HPP_

namespace ppffm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ppffm

#endif  // PPFFM_VERSION_HPP_
