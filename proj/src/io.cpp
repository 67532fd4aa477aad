#include "yamabe/io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace yf {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(17);
  return f;
}

}  // namespace

void write_profile_csv(const std::string& path, const Profile& prof) {
  prof.validate();
  auto f = open_out(path);
  f << "# coord=" << coord_tag(prof.coord) << " time=" << (prof.time_kind == TimeKind::t ? "t" : "tau") << ":"
    << prof.time << "\n";
  f << coord_tag(prof.coord) << ",value\n";
  for (std::size_t i = 0; i < prof.grid.size(); ++i) f << prof.grid[i] << "," << prof.values[i] << "\n";
}

Profile read_profile_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(f, line);
  const auto c = line.find("coord="), t = line.find(" time=");
  if (line.rfind("# ", 0) != 0 || c == std::string::npos || t == std::string::npos)
    throw std::invalid_argument(path + ": missing coordinate header");
  Profile p;
  p.coord = coord_from_tag(line.substr(c + 6, t - c - 6));
  const std::string tv = line.substr(t + 6);
  const auto colon = tv.find(':');
  if (colon == std::string::npos) throw std::invalid_argument(path + ": malformed time tag");
  const std::string kind = tv.substr(0, colon);
  if (kind == "t")
    p.time_kind = TimeKind::t;
  else if (kind == "tau")
    p.time_kind = TimeKind::tau;
  else
    throw std::invalid_argument(path + ": unknown time kind " + kind);
  p.time = std::stod(tv.substr(colon + 1));
  std::getline(f, line);  // column names
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument(path + ": malformed row");
    p.grid.push_back(std::stod(line.substr(0, comma)));
    p.values.push_back(std::stod(line.substr(comma + 1)));
  }
  p.validate();
  return p;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns, const std::vector<std::string>& comments) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  auto f = open_out(path);
  for (const auto& c : comments) f << "# " << c << "\n";
  for (std::size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
  f << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) f << (j ? "," : "") << columns[j][i];
    f << "\n";
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(f);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return o.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return sha256_hex(s.str());
}

}  // namespace yf
