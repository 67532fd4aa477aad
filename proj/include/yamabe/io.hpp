#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "yamabe/coords.hpp"

namespace yf {

/// Header line "# coord=<tag> time=<tag>:<value>", then "x,value" rows at 17 significant digits.
void write_profile_csv(const std::string& path, const Profile& prof);
Profile read_profile_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns, const std::vector<std::string>& comments = {});
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace yf
