#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridlab {

// Standard alphabet, '=' padding.
std::string base64_encode(const std::uint8_t* data, size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace gridlab
