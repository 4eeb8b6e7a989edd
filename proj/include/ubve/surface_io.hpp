#pragma once

#include <json.hpp>

#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "ubve/surface.hpp"

namespace ubve {

namespace detail {

inline Point json_point(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw InvalidArgument(std::string(what) + " must be a 3-element array");
  return Point(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  throw InvalidArgument("OFF: unexpected end of file");
}

}  // namespace detail

/// Builds a surface from a descriptor such as
/// {"type":"sphere","radius":1,"center":[0,0,0],"grid":[32,64]} or
/// {"type":"ellipsoid","a":1,"b":1,"c":2,"grid":[64,128]}.
inline Surface surface_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const Point center = j.contains("center") ? detail::json_point(j["center"], "center")
                                              : Point::Zero();
    int n_theta = 32, n_phi = 64;
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (!g.is_array() || g.size() != 2) throw InvalidArgument("grid must be [n_theta, n_phi]");
      n_theta = g[0].get<int>();
      n_phi = g[1].get<int>();
    }
    if (type == "sphere") return make_sphere(j.at("radius").get<double>(), center, n_theta, n_phi);
    if (type == "ellipsoid")
      return make_ellipsoid(j.at("a").get<double>(), j.at("b").get<double>(),
                            j.at("c").get<double>(), n_theta, n_phi, center);
    throw InvalidArgument("unknown surface type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("surface descriptor: ") + e.what());
  }
}

/// Reads an OFF mesh: "OFF", then "nv nf ne", vertex lines, face lines "3 i j k".
inline TriangleMesh read_off(std::istream& in) {
  std::string header = detail::next_data_line(in);
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  std::size_t nv = 0, nf = 0, ne = 0;
  if (magic == "OFF") {
    if (!(hs >> nv >> nf)) {
      std::istringstream cs(detail::next_data_line(in));
      if (!(cs >> nv >> nf)) throw InvalidArgument("OFF: bad counts line");
    }
  } else {
    std::istringstream cs(header);
    if (!(cs >> nv >> nf)) throw InvalidArgument("OFF: missing header");
  }
  (void)ne;
  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::istringstream ls(detail::next_data_line(in));
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw InvalidArgument("OFF: bad vertex line");
    mesh.vertices.emplace_back(x, y, z);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    std::istringstream ls(detail::next_data_line(in));
    int count, a, b, c;
    if (!(ls >> count >> a >> b >> c) || count != 3)
      throw InvalidArgument("OFF: only triangular faces are supported");
    mesh.triangles.push_back({a, b, c});
  }
  return mesh;
}

/// Loads a surface from a JSON descriptor or an .off mesh, chosen by extension.
inline Surface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open surface file '" + path + "'");
  const bool is_off = path.size() >= 4 && path.compare(path.size() - 4, 4, ".off") == 0;
  if (is_off) return make_triangulated_surface(read_off(in));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("surface descriptor '" + path + "': " + e.what());
  }
  return surface_from_json(j);
}

}  // namespace ubve
