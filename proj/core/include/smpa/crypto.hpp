#pragma once

#include <string>
#include <string_view>

namespace smpa {

std::string sha256_hex(std::string_view data);

// 256 bits from the OS CSPRNG, hex encoded.
std::string random_token();

bool constant_time_equal(std::string_view a, std::string_view b) noexcept;

}  // namespace smpa
