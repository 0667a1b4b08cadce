#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "densal/errors.hpp"
#include "densal/geo.hpp"

namespace densal {

// Tree centre annotations for one labelled block.
struct TreeAnnotationSet {
  std::string block_id;
  BoundsM bounds;
  std::vector<PointM> points;

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!bounds.contains(points[i].x, points[i].y)) {
        throw Error("TreeAnnotationSet '" + block_id + "': point " + std::to_string(i) +
                    " lies outside the declared block bounds");
      }
    }
  }
};

// CSV with header `block_id,x_m,y_m`. Bounds are not part of the format;
// callers attach them from the owning raster or manifest.
inline void write_tree_csv(const std::filesystem::path& path,
                           const std::vector<TreeAnnotationSet>& sets) {
  std::ofstream os(path);
  if (!os) throw Error("write_tree_csv: cannot open " + path.string());
  os << "block_id,x_m,y_m\n";
  char buf[64];
  for (const auto& set : sets) {
    for (const auto& p : set.points) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", p.x, p.y);
      os << set.block_id << ',' << buf << '\n';
    }
  }
}

inline std::map<std::string, std::vector<PointM>> read_tree_csv(
    const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw PrerequisiteError("read_tree_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("block_id,x_m,y_m", 0) != 0) {
    throw Error("read_tree_csv: missing header in " + path.string());
  }
  std::map<std::string, std::vector<PointM>> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, xs, ys;
    if (!std::getline(ss, id, ',') || !std::getline(ss, xs, ',') || !std::getline(ss, ys)) {
      throw Error("read_tree_csv: malformed line " + std::to_string(lineno) + " in " +
                  path.string());
    }
    try {
      out[id].push_back({std::stod(xs), std::stod(ys)});
    } catch (const std::exception&) {
      throw Error("read_tree_csv: bad coordinate on line " + std::to_string(lineno) +
                  " in " + path.string());
    }
  }
  return out;
}

}  // namespace densal
