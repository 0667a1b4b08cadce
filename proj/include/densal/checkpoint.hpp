#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "densal/errors.hpp"

namespace densal {

// PMDL checkpoint container: magic "PMDL", u32 header length, JSON header,
// float32 parameter payload.
inline void write_pmdl(const std::filesystem::path& path, const nlohmann::json& header,
                       std::span<const double> params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_pmdl: cannot open " + path.string());
  std::string hdr = header.dump();
  std::uint32_t len = static_cast<std::uint32_t>(hdr.size());
  os.write("PMDL", 4);
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (double p : params) {
    float f = static_cast<float>(p);
    os.write(reinterpret_cast<const char*>(&f), sizeof(float));
  }
  if (!os) throw Error("write_pmdl: short write to " + path.string());
}

inline std::pair<nlohmann::json, std::vector<double>> read_pmdl(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PrerequisiteError("read_pmdl: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PMDL", 4) != 0) {
    throw Error("read_pmdl: bad magic in " + path.string());
  }
  std::uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hdr(len, '\0');
  is.read(hdr.data(), len);
  if (!is) throw Error("read_pmdl: truncated header in " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hdr);
  } catch (const nlohmann::json::parse_error&) {
    throw Error("read_pmdl: invalid header JSON in " + path.string());
  }
  std::vector<double> params;
  float f;
  while (is.read(reinterpret_cast<char*>(&f), sizeof(float))) {
    params.push_back(static_cast<double>(f));
  }
  return {std::move(header), std::move(params)};
}

}  // namespace densal
